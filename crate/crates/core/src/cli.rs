//! The `levyx` command line.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure (or a
//! failed verification), 64 usage error.

use crate::error::{Error, Result};
use crate::exponent::{self, LaplaceExponent};
use crate::expfunctional::{self, MomentSign};
use crate::montecarlo::{self, Horizon, Model, SimConfig, Target};
use crate::pssmp::{self, IntertwiningCase};
use crate::report::{self, num, Artifact, RunManifest, Table};
use crate::scale::{self, ScaleFunction, Strategy};
use crate::schema;
use crate::transform;
use crate::verify::{self, Status, VerifyOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "levyx", version, about = "Transforms of Levy exponents, scale functions, exponential functionals and pssMp")]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Monte Carlo path count.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Numerical tolerance where a command takes one.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Write artifacts and a manifest here instead of printing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores, capped by LEVYX_THREADS).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    #[command(subcommand)]
    Exponent(ExponentCmd),
    #[command(subcommand)]
    Transform(TransformCmd),
    #[command(subcommand)]
    Scale(ScaleCmd),
    #[command(subcommand)]
    Expfun(ExpfunCmd),
    #[command(subcommand)]
    Pssmp(PssmpCmd),
    #[command(subcommand)]
    Mc(McCmd),
    /// Run acceptance criteria: `all` or a number 1..16.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct SpecArg {
    /// JSON exponent spec.
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum ExponentCmd {
    /// ψ(u) (φ(u) for subordinators) on a list of points.
    Eval {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
    },
    /// θ, κ, ψ'(0+) and the variation type.
    Info {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Convexity and monotonicity checks on a grid.
    Validate {
        #[command(flatten)]
        spec: SpecArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum TransformCmd {
    /// T_{δ,β}ψ, or T^γ_{δ,β}ψ with --gamma; prints values or the new spec.
    Apply {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, value_delimiter = ',')]
        eval: Vec<f64>,
    },
    /// Lévy triple of T_{δ,β}ψ.
    Triple {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        beta: f64,
    },
    /// max |T_γ(T_βψ) − T_{γ+β}ψ| on a grid.
    Semigroup {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2,5")]
        u: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Closed,
    Inversion,
    Theorem,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Closed => Strategy::ClosedForm,
            StrategyArg::Inversion => Strategy::LaplaceInversion,
            StrategyArg::Theorem => Strategy::TheoremQuadrature,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum ScaleCmd {
    /// W(x) on a range `a:b:step`, CSV with an error column.
    Table {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        x: String,
        #[arg(long, value_enum, default_value = "auto")]
        strategy: StrategyArg,
    },
    /// |∫₀^A e^{−ux}W(x)dx − 1/ψ(u)|.
    Laplace {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 40.0)]
        a: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExpfunCmd {
    /// Integer moments of I (subordinators) or I^{−1} (spectrally negative).
    Moments {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Moments under T_β instead (subordinators).
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Beta factorization of I_{T_{δ,θ}ψ}.
    Factorize {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Power and constant of the density tail of I_{T^β_{δ,θ}ψ}.
    Tail {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum PssmpCmd {
    /// Entrance-law moments of J.
    Entrance {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
    /// Beta intertwining, case 1, 2 or 3.
    Intertwine {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        case: u8,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum McCmd {
    /// Sample the exponential functional and compare with its moments.
    Expfun {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
        #[arg(long, default_value_t = 1e-7)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        moments: usize,
    },
    /// Sliced splitting and the Laplace transform of S_t.
    Slice {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        u: Vec<f64>,
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
    },
    /// X_t of the pssMp built from ξ by the Lamperti time change.
    Lamperti {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `all` or a criterion number.
    pub which: String,
    /// Skip the Monte Carlo criteria.
    #[arg(long)]
    pub quick: bool,
}

/// Parses `a:b:step` into an inclusive grid.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Validation(format!("range must be a:b:step, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (a, b, h) = (v[0], v[1], v[2]);
    if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(Error::Validation("range has more than a million points".into()));
    }
    Ok((0..=n).map(|i| a + h * i as f64).collect())
}

struct Ctx<'a> {
    cli: &'a Cli,
    spec_hash: Option<String>,
}

impl Ctx<'_> {
    fn load(&mut self, s: &SpecArg) -> Result<LaplaceExponent> {
        let bytes = std::fs::read(&s.spec).map_err(|e| Error::Validation(format!("cannot read spec {}: {e}", s.spec.display())))?;
        self.spec_hash = Some(report::sha256_hex(&bytes));
        let text = String::from_utf8(bytes).map_err(|_| Error::Validation("spec is not UTF-8".into()))?;
        schema::parse_spec(&text)
    }

    fn sim(&self, dt: f64, eps: f64, default_paths: usize) -> SimConfig {
        SimConfig {
            seed: self.cli.seed,
            paths: self.cli.paths.unwrap_or(default_paths),
            dt,
            eps,
            horizon: Horizon::Adaptive,
            workers: self.cli.workers,
            ..Default::default()
        }
    }
}

fn json_art(name: &str, v: Value) -> Artifact {
    Artifact::Json { name: name.into(), value: report::canonical(v) }
}

fn csv_art(name: &str, t: &Table) -> Artifact {
    Artifact::Csv { name: name.into(), text: t.to_csv() }
}

/// A rounding-level error for closed evaluations, the quadrature tolerance otherwise.
fn eval_err(psi: &LaplaceExponent, v: f64) -> f64 {
    if psi.as_family().is_some() {
        4.0 * f64::EPSILON * v.abs()
    } else {
        exponent::LK_TOL.max(4.0 * f64::EPSILON * v.abs())
    }
}

fn dispatch(ctx: &mut Ctx) -> Result<(Vec<Artifact>, i32)> {
    let cli = ctx.cli;
    let tol = cli.tol;
    let one = |a: Artifact| Ok((vec![a], 0));
    match &cli.cmd {
        Cmd::Exponent(c) => match c {
            ExponentCmd::Eval { spec, u } => {
                let psi = ctx.load(spec)?;
                let mut t = Table::new(&["u", "value", "err"]);
                for &x in u {
                    let v = psi.eval(x)?;
                    t.push(vec![x, v, eval_err(&psi, v)]);
                }
                one(csv_art("exponent.csv", &t))
            }
            ExponentCmd::Info { spec } => {
                let psi = ctx.load(spec)?;
                let d = exponent::drift_at_zero(&psi, 1e-6);
                let theta = if psi.is_subordinator() { None } else { Some(psi.theta()?) };
                one(json_art(
                    "exponent.json",
                    json!({
                        "exponent": psi.describe(),
                        "subordinator": psi.is_subordinator(),
                        "kappa": num(psi.kappa()),
                        "theta": theta.map(num),
                        "drift_at_zero": num(d.value),
                        "drift_at_zero_err": num(1e-6),
                        "killed": d.killed,
                        "unbounded_variation": psi.unbounded_variation(),
                        "floor": num(psi.floor()),
                    }),
                ))
            }
            ExponentCmd::Validate { spec } => {
                let psi = ctx.load(spec)?;
                let grid: Vec<f64> = (0..=80).map(|i| 0.125 * i as f64).collect();
                let r = exponent::validate(&psi, &grid)?;
                let code = if r.all_pass() { 0 } else { 2 };
                Ok((vec![json_art("validation.json", report::to_value(&r)?)], code))
            }
        },
        Cmd::Transform(c) => match c {
            TransformCmd::Apply { spec, delta, beta, gamma, eval } => {
                let psi = ctx.load(spec)?;
                transform::TransformParams { delta: *delta, beta: *beta, gamma: *gamma }.validate()?;
                let t = transform::t_composed(&psi, *gamma, *delta, *beta)?;
                if eval.is_empty() {
                    return one(json_art("transform.json", schema::emit_spec(&t)?));
                }
                let rows: Vec<Value> = eval
                    .iter()
                    .map(|&u| {
                        let v = t.psi(u)?;
                        Ok(json!({ "u": num(u), "value": num(v), "err": num(eval_err(&t, v)) }))
                    })
                    .collect::<Result<_>>()?;
                let v = if rows.len() == 1 { rows.into_iter().next().expect("one row") } else { Value::Array(rows) };
                one(json_art("transform.json", v))
            }
            TransformCmd::Triple { spec, delta, beta } => {
                let psi = ctx.load(spec)?;
                let t = psi
                    .to_triple()
                    .ok_or_else(|| Error::Unavailable(format!("no Levy triple known for {}", psi.describe())))?;
                let tt = transform::transformed_triple(&t, *delta, *beta)?;
                one(json_art("triple.json", json!({ "triple": report::to_value(&tt)? })))
            }
            TransformCmd::Semigroup { spec, beta, gamma, u } => {
                let psi = ctx.load(spec)?;
                let w = transform::semigroup_check(&psi, *beta, *gamma, u)?;
                one(json_art("semigroup.json", json!({ "beta": num(*beta), "gamma": num(*gamma), "max_abs_diff": num(w) })))
            }
        },
        Cmd::Scale(c) => match c {
            ScaleCmd::Table { spec, x, strategy } => {
                let psi = ctx.load(spec)?;
                let xs = parse_range(x)?;
                let w = ScaleFunction::with_strategy(&psi, (*strategy).into())?;
                let mut t = Table::new(&["x", "W", "err"]);
                for &x in &xs {
                    let v = w.eval_with_err(x)?;
                    t.push(vec![x, v.value, v.err_est]);
                }
                one(csv_art("scale.csv", &t))
            }
            ScaleCmd::Laplace { spec, u, a } => {
                let psi = ctx.load(spec)?;
                let w = ScaleFunction::auto(&psi)?;
                let r = scale::verify_laplace_identity(&w, *u, *a, tol)?;
                one(json_art("laplace.json", json!({ "u": num(*u), "A": num(*a), "result": report::to_value(&r)? })))
            }
        },
        Cmd::Expfun(c) => match c {
            ExpfunCmd::Moments { spec, n, beta } => {
                let psi = ctx.load(spec)?;
                let lad = match beta {
                    Some(b) => expfunctional::sub_tbeta_moments(&psi, *b, *n)?,
                    None if psi.is_subordinator() => expfunctional::sub_moments(&psi, *n)?,
                    None => expfunctional::sn_neg_moments(&psi, *n)?,
                };
                let label = match lad.sign {
                    MomentSign::Positive => "E[I^n]",
                    MomentSign::Negative => "E[I^-n]",
                };
                let mut t = Table::new(&["n", label, "err"]);
                for (k, v) in lad.values.iter().enumerate() {
                    // products of n evaluations: relative rounding ~ n·ε
                    t.push(vec![k as f64, *v, 4.0 * (k as f64 + 1.0) * f64::EPSILON * v.abs()]);
                }
                one(csv_art("moments.csv", &t))
            }
            ExpfunCmd::Factorize { spec, delta, n } => {
                let psi = ctx.load(spec)?;
                let f = expfunctional::beta_factorization(&psi, *delta, n + 1)?;
                let mut rows = Vec::new();
                for k in 1..=*n {
                    let s = -(k as f64);
                    rows.push(json!({ "s": num(s), "moment": num(f.law.moment(s)?), "err": num(1e-12) }));
                }
                one(json_art("factorization.json", json!({ "factorization": report::to_value(&f)?, "negative_moments": rows })))
            }
            ExpfunCmd::Tail { spec, delta, beta } => {
                let psi = ctx.load(spec)?;
                let t = expfunctional::tail_asymptote(&psi, *delta, *beta)?;
                one(json_art("tail.json", report::to_value(&t)?))
            }
        },
        Cmd::Pssmp(c) => match c {
            PssmpCmd::Entrance { spec, n } => {
                let psi = ctx.load(spec)?;
                let m = pssmp::entrance_moments(&psi, *n)?;
                let mut t = Table::new(&["n", "E[J^n]", "err"]);
                for (k, v) in m.moments.iter().enumerate() {
                    t.push(vec![k as f64, *v, 4.0 * (k as f64 + 1.0) * f64::EPSILON * v.abs()]);
                }
                Ok((vec![csv_art("entrance.csv", &t), json_art("regime.json", report::to_value(&m.regime)?)], 0))
            }
            PssmpCmd::Intertwine { spec, delta, case, n } => {
                let psi = ctx.load(spec)?;
                let r = pssmp::intertwining_factor(&psi, *delta, IntertwiningCase::from_index(*case)?, *n)?;
                let code = if r.max_rel_err <= tol.max(1e-10) { 0 } else { 3 };
                Ok((vec![json_art("intertwining.json", report::to_value(&r)?)], code))
            }
        },
        Cmd::Mc(c) => match c {
            McCmd::Expfun { spec, dt, eps, moments } => {
                let psi = ctx.load(spec)?;
                let cfg = ctx.sim(*dt, *eps, 100_000);
                let s = montecarlo::sample_exp_functional(&psi, &cfg)?;
                let targets: Vec<Target> = if psi.is_subordinator() {
                    let lad = expfunctional::sub_moments(&psi, *moments)?;
                    (1..=*moments).map(|k| Target::Moment { order: k as f64, value: lad.values[k] }).collect()
                } else {
                    let lad = expfunctional::sn_neg_moments(&psi, *moments)?;
                    (1..=*moments).map(|k| Target::Moment { order: -(k as f64), value: lad.values[k] }).collect()
                };
                let r = montecarlo::mc_compare(&s.samples, &targets)?;
                let code = if r.pass { 0 } else { 3 };
                let v = json!({
                    "exponent": psi.describe(),
                    "config": report::to_value(&cfg)?,
                    "method": s.method,
                    "residual_mean": num(s.residual_mean),
                    "residual_max": num(s.residual_max),
                    "comparison": report::to_value(&r)?,
                });
                Ok((vec![json_art("mc_expfun.json", v)], code))
            }
            McCmd::Slice { spec, beta, t, u, dt } => {
                let psi = ctx.load(spec)?;
                let cfg = ctx.sim(*dt, 1e-7, 100_000);
                let s = montecarlo::sliced_splitting(&psi, *beta, *t, &cfg)?;
                let tb = transform::t_beta(&psi, *beta)?;
                let targets = u
                    .iter()
                    .map(|&x| Ok(Target::Laplace { u: x, value: (-t * tb.eval(x)?).exp() }))
                    .collect::<Result<Vec<_>>>()?;
                let r = montecarlo::mc_compare(&s.spliced, &targets)?;
                let code = if r.pass { 0 } else { 3 };
                let v = json!({
                    "exponent": psi.describe(),
                    "config": report::to_value(&cfg)?,
                    "method": s.method,
                    "comparison": report::to_value(&r)?,
                });
                Ok((vec![json_art("mc_slice.json", v)], code))
            }
            McCmd::Lamperti { spec, alpha, x0, t, dt } => {
                let psi = ctx.load(spec)?;
                let cfg = ctx.sim(*dt, 1e-7, 20_000);
                let model = Model::from_exponent(&psi, cfg.eta)?;
                let xs = montecarlo::lamperti_samples(&model, *alpha, *x0, *t, &cfg, 0)?;
                let (m1, s1) = montecarlo::mean_se(&xs);
                let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
                let (m2, s2) = montecarlo::mean_se(&sq);
                let v = json!({
                    "exponent": psi.describe(),
                    "config": report::to_value(&cfg)?,
                    "alpha": num(*alpha), "x0": num(*x0), "t": num(*t),
                    "mean": num(m1), "mean_se": num(s1),
                    "second_moment": num(m2), "second_moment_se": num(s2),
                });
                one(json_art("mc_lamperti.json", v))
            }
        },
        Cmd::Verify(a) => {
            let opts = VerifyOptions { quick: a.quick, seed: cli.seed, workers: cli.workers, paths: cli.paths };
            let ids: Vec<u8> = if a.which == "all" {
                verify::ids().collect()
            } else {
                vec![a.which.parse::<u8>().map_err(|_| Error::Validation(format!("expected `all` or 1..16, got `{}`", a.which)))?]
            };
            let mut results = Vec::new();
            let mut lines = String::new();
            for id in ids {
                let r = verify::run(id, &opts)?;
                lines.push_str(&r.line());
                lines.push('\n');
                results.push(r);
            }
            let code = if results.iter().any(|r| r.status == Status::Fail) { 3 } else { 0 };
            let summary = Artifact::Csv { name: "verify.txt".into(), text: lines };
            Ok((vec![summary, json_art("verify.json", json!({ "results": report::to_value(&results)? }))], code))
        }
    }
}

/// Runs the CLI on `args` (including the program name), writing to `out`
/// and `err`. Returns the exit code.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let mut ctx = Ctx { cli: &cli, spec_hash: None };
    let (arts, code) = match dispatch(&mut ctx) {
        Ok(x) => x,
        Err(e) => {
            let _ = writeln!(err, "levyx: {e}");
            return e.exit_code();
        }
    };
    match &cli.out {
        Some(dir) => {
            let config = json!({ "tol": num(cli.tol), "paths": cli.paths, "workers": cli.workers });
            let mut m = RunManifest::new(args[1..].to_vec(), config, Some(cli.seed));
            m.spec_sha256 = ctx.spec_hash.clone();
            match report::write_run(dir, m, &arts) {
                Ok(paths) => {
                    for p in paths {
                        let _ = writeln!(out, "{}", p.display());
                    }
                }
                Err(e) => {
                    let _ = writeln!(err, "levyx: {e}");
                    return e.exit_code();
                }
            }
        }
        None => {
            // verify prints its summary lines only
            let shown = if matches!(cli.cmd, Cmd::Verify(_)) { &arts[..1] } else { &arts[..] };
            for a in shown {
                let _ = out.write_all(&a.plain_bytes());
            }
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:2:0.5").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_range("0:0.3:0.1").unwrap().len(), 4);
        assert!(parse_range("0:2").is_err());
        assert!(parse_range("2:0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
    }

    #[test]
    fn usage_errors_exit_64() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let a: Vec<String> = ["levyx", "scale", "table", "--bogus"].iter().map(|s| s.to_string()).collect();
        assert_eq!(run(&a, &mut o, &mut e), EXIT_USAGE);
        assert!(!e.is_empty());
        let a: Vec<String> = ["levyx", "--help"].iter().map(|s| s.to_string()).collect();
        assert_eq!(run(&a, &mut o, &mut e), 0);
    }
}
