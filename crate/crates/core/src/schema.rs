//! JSON exponent specs.
//!
//! ```json
//! {"family": "brownian", "params": {"sigma2": 1, "drift": 0, "kappa": 0}}
//! {"triple": {"a": 0, "sigma2": 1, "jumps": [{"type": "exp", "weight": 1, "rate": 2}]}}
//! {"transform": {"base": {...}, "delta": 1, "beta": 1, "gamma": 0}}
//! {"esscher": {"base": {...}, "beta": 1}}
//! {"shift": {"base": {...}, "theta": 1}}
//! {"neg_theta_shift": {"base": {...}, "theta": 1}}
//! ```

use crate::error::{Error, Result};
use crate::exponent::{Family, LaplaceExponent, LevyTriple, Node};
use crate::transform;
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::Path;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformSpec {
    base: Value,
    #[serde(default)]
    delta: f64,
    #[serde(default)]
    beta: f64,
    #[serde(default)]
    gamma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EsscherSpec {
    base: Value,
    beta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftSpec {
    base: Value,
    theta: f64,
}

fn field<T: for<'de> Deserialize<'de>>(what: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Validation(format!("{what}: {e}")))
}

/// Builds and validates the exponent described by a JSON value.
pub fn from_value(v: &Value) -> Result<LaplaceExponent> {
    let obj = v.as_object().ok_or_else(|| Error::Validation("spec must be a JSON object".into()))?;
    if obj.contains_key("family") {
        let f: Family = field("family spec", v.clone())?;
        return LaplaceExponent::family(f);
    }
    if obj.len() != 1 {
        return Err(Error::Validation(format!(
            "spec needs exactly one of family, triple, transform, esscher, shift, neg_theta_shift; got keys {:?}",
            obj.keys().collect::<Vec<_>>()
        )));
    }
    let (key, body) = obj.iter().next().expect("one key");
    match key.as_str() {
        "triple" => LaplaceExponent::triple(field::<LevyTriple>("triple", body.clone())?),
        "transform" => {
            let t: TransformSpec = field("transform", body.clone())?;
            let base = from_value(&t.base)?;
            if t.gamma > 0.0 {
                transform::t_composed(&base, t.gamma, t.delta, t.beta)
            } else {
                transform::t_transform(&base, t.delta, t.beta)
            }
        }
        "esscher" => {
            let t: EsscherSpec = field("esscher", body.clone())?;
            transform::esscher(&from_value(&t.base)?, t.beta)
        }
        "shift" => {
            let t: ShiftSpec = field("shift", body.clone())?;
            transform::shift(&from_value(&t.base)?, t.theta)
        }
        "neg_theta_shift" => {
            let t: ShiftSpec = field("neg_theta_shift", body.clone())?;
            transform::neg_theta_shift(&from_value(&t.base)?, t.theta)
        }
        other => Err(Error::Validation(format!("unknown spec kind `{other}`"))),
    }
}

pub fn parse_spec(text: &str) -> Result<LaplaceExponent> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Validation(format!("spec is not valid JSON: {e}")))?;
    from_value(&v)
}

pub fn load_spec(path: &Path) -> Result<LaplaceExponent> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read spec {}: {e}", path.display())))?;
    parse_spec(&text)
}

/// Inverse of [`from_value`]. Custom exponents have no JSON form.
pub fn emit_spec(psi: &LaplaceExponent) -> Result<Value> {
    Ok(match psi.node() {
        Node::Family(f) => serde_json::to_value(f).map_err(|e| Error::Numerical(e.to_string()))?,
        Node::Triple(t) => json!({ "triple": t }),
        Node::Esscher { base, beta, .. } => json!({ "esscher": { "base": emit_spec(base)?, "beta": beta } }),
        Node::T { base, delta, beta, .. } => {
            json!({ "transform": { "base": emit_spec(base)?, "delta": delta, "beta": beta } })
        }
        Node::Composed { base, gamma, delta, beta, .. } => {
            json!({ "transform": { "base": emit_spec(base)?, "delta": delta, "beta": beta, "gamma": gamma } })
        }
        Node::Shift { base, theta } => json!({ "shift": { "base": emit_spec(base)?, "theta": theta } }),
        Node::NegTheta { base, theta } => json!({ "neg_theta_shift": { "base": emit_spec(base)?, "theta": theta } }),
        Node::Custom { name, .. } => return Err(Error::Unavailable(format!("custom exponent `{name}` has no JSON form"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn load_examples() {
        let b = parse_spec(r#"{"family":"brownian","params":{"sigma2":1,"drift":0,"kappa":0}}"#).unwrap();
        assert_eq!(b.psi(2.0).unwrap(), 2.0);
        let e = parse_spec(r#"{"family":"stable","params":{"alpha":2.5}}"#).unwrap_err();
        assert!(matches!(e, Error::Validation(ref m) if m.contains("alpha")), "{e}");
        let t = parse_spec(
            r#"{"triple":{"sigma2":0,"a":0,"jumps":[{"type":"table","x":[-2,-1,-0.5],"density":[0,1,0]}]}}"#,
        )
        .unwrap();
        assert!(t.as_triple().is_some());
        // field-level messages
        let e = parse_spec(r#"{"transform":{"base":{"family":"stable_sub","params":{"alpha":0.5}},"detla":1}}"#).unwrap_err();
        assert!(e.to_string().contains("detla"), "{e}");
        assert!(parse_spec(r#"{"foo":{}}"#).is_err());
        assert!(parse_spec("[1]").is_err());
        assert!(load_spec(Path::new("/nonexistent/spec.json")).is_err());
    }

    #[test]
    fn custom_has_no_json_form() {
        let c = LaplaceExponent::custom("x", |u| u, 0.0, false);
        assert!(matches!(emit_spec(&c), Err(Error::Unavailable(_))));
    }

    fn nested(alpha: f64, delta: f64, beta: f64, gamma: f64) -> LaplaceExponent {
        let s: LaplaceExponent = Family::Stable { alpha, kappa: 0.3, c: 0.2 }.into();
        let t = transform::t_composed(&s, gamma, delta, beta).unwrap();
        transform::esscher(&t, 0.5).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip(alpha in 1.05f64..1.95, delta in 0.0f64..2.0, beta in 0.01f64..2.0, gamma in 0.0f64..2.0) {
            let psi = nested(alpha, delta, beta, gamma);
            let text = serde_json::to_string(&emit_spec(&psi).unwrap()).unwrap();
            let back = parse_spec(&text).unwrap();
            for u in [0.0, 0.3, 1.0, 2.5, 7.0] {
                let (a, b) = (psi.psi(u).unwrap(), back.psi(u).unwrap());
                prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
            }
        }
    }
}
