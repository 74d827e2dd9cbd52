//! Output plumbing: 17-digit numbers, CSV tables, hashed run manifests.

use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::{Number, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const MANIFEST_NAME: &str = "manifest.json";

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// A JSON number carrying exactly [`fmt_num`]'s digits; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_num(x)).expect("formatted float parses"))
    } else {
        Value::String(fmt_num(x))
    }
}

/// Re-encodes every float in a serialized value with [`num`].
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map(num).unwrap_or(Value::Number(n)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(canonical(serde_json::to_value(x).map_err(|e| Error::Numerical(format!("serialize: {e}")))?))
}

pub fn to_json_bytes(v: &Value) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("values serialize");
    b.push(b'\n');
    b
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Header plus rows of numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run. No timestamps, so identical
/// inputs give identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub spec_sha256: Option<String>,
    pub config: Value,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, config: Value, seed: Option<u64>) -> Self {
        Self {
            command,
            spec_sha256: None,
            config: canonical(config),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            outputs: Vec::new(),
        }
    }
}

/// One artifact: a JSON value (gets a `manifest` field) or CSV text (gets a
/// leading comment line).
pub enum Artifact {
    Json { name: String, value: Value },
    Csv { name: String, text: String },
}

impl Artifact {
    pub fn name(&self) -> &str {
        match self {
            Artifact::Json { name, .. } | Artifact::Csv { name, .. } => name,
        }
    }

    /// Bytes as printed to stdout, without the manifest reference.
    pub fn plain_bytes(&self) -> Vec<u8> {
        match self {
            Artifact::Json { value, .. } => to_json_bytes(value),
            Artifact::Csv { text, .. } => text.as_bytes().to_vec(),
        }
    }

    fn file_bytes(&self) -> Vec<u8> {
        match self {
            Artifact::Json { value, .. } => {
                let mut v = value.clone();
                match &mut v {
                    Value::Object(o) => {
                        o.insert("manifest".into(), Value::String(MANIFEST_NAME.into()));
                    }
                    _ => v = serde_json::json!({ "manifest": MANIFEST_NAME, "data": v }),
                }
                to_json_bytes(&v)
            }
            Artifact::Csv { text, .. } => format!("# manifest: {MANIFEST_NAME}\n{text}").into_bytes(),
        }
    }
}

/// Writes the artifacts and a manifest listing their hashes; returns the paths.
pub fn write_run(dir: &Path, mut manifest: RunManifest, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Validation(format!("cannot create {}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for a in artifacts {
        let bytes = a.file_bytes();
        let p = dir.join(a.name());
        std::fs::write(&p, &bytes).map_err(|e| Error::Validation(format!("cannot write {}: {e}", p.display())))?;
        manifest.outputs.push(OutputRecord { path: a.name().to_string(), sha256: sha256_hex(&bytes) });
        paths.push(p);
    }
    let mp = dir.join(MANIFEST_NAME);
    std::fs::write(&mp, to_json_bytes(&to_value(&manifest)?))
        .map_err(|e| Error::Validation(format!("cannot write {}: {e}", mp.display())))?;
    paths.push(mp);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(2.0), "2.0000000000000000e0");
        assert_eq!(num(f64::NAN), Value::String("NaN".into()));
        let mut t = Table::new(&["x", "w"]);
        t.push(vec![0.0, 1.5]);
        assert_eq!(t.to_csv(), "x,w\n0.0000000000000000e0,1.5000000000000000e0\n");
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifests_are_reproducible() {
        let dir = std::env::temp_dir().join(format!("levyx-report-{}", std::process::id()));
        let run = || {
            let m = RunManifest::new(vec!["x".into()], serde_json::json!({"tol": 1e-8}), Some(3));
            let arts = [
                Artifact::Json { name: "a.json".into(), value: serde_json::json!({"v": num(1.0 / 3.0)}) },
                Artifact::Csv { name: "b.csv".into(), text: "x\n1\n".into() },
            ];
            write_run(&dir, m, &arts).unwrap();
            std::fs::read(dir.join(MANIFEST_NAME)).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        let csv = std::fs::read_to_string(dir.join("b.csv")).unwrap();
        assert!(csv.starts_with("# manifest: manifest.json"));
        let j: Value = serde_json::from_slice(&std::fs::read(dir.join("a.json")).unwrap()).unwrap();
        assert_eq!(j["manifest"], "manifest.json");
        std::fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
            let v = num(x);
            let s = serde_json::to_string(&v).unwrap();
            let back: Value = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back.as_f64().unwrap().to_bits(), x.to_bits());
        }
    }
}
