//! Path simulation: increments, exponential functionals, Gnedin's sliced
//! splitting and the Lamperti time change.
//!
//! Every path draws from its own ChaCha8 stream (seed, stream = path
//! index), and results are collected in path order, so output does not
//! depend on the worker count.

use crate::error::{Error, Result};
use crate::exponent::{self, Family, LaplaceExponent, LevyTriple, Node};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma as GammaDist, Poisson, StandardNormal};
use serde::Serialize;
use std::f64::consts::PI;

// ====================================================================== config

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Horizon {
    /// Integrate to a fixed time.
    Fixed { t: f64 },
    /// Integrate until e^{−ξ} < ε.
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub paths: usize,
    pub dt: f64,
    pub eps: f64,
    pub horizon: Horizon,
    /// Jump truncation level for general triples.
    pub eta: f64,
    /// 0 means one per available core.
    pub workers: usize,
    /// Safety stop for paths that fail to drift away.
    pub max_time: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            paths: 100_000,
            dt: 0.02,
            eps: 1e-7,
            horizon: Horizon::Adaptive,
            eta: 1e-3,
            workers: 0,
            max_time: 1e5,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::Validation(format!("eps must be in (0,1), got {}", self.eps)));
        }
        if self.paths == 0 {
            return Err(Error::Validation("paths must be >= 1".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::Validation(format!("eta must be in (0,1), got {}", self.eta)));
        }
        if let Horizon::Fixed { t } = self.horizon {
            if !(t > 0.0) {
                return Err(Error::Validation(format!("horizon must be > 0, got {t}")));
            }
        }
        Ok(())
    }
}

/// RNG for one path.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Worker count after applying the `LEVYX_THREADS` cap.
pub fn effective_workers(requested: usize) -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut w = if requested == 0 { avail } else { requested };
    if let Some(cap) = std::env::var("LEVYX_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if cap > 0 {
            w = w.min(cap);
        }
    }
    w.max(1)
}

/// (0..n).map(f), in order, on up to `workers` threads.
pub fn par_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let w = effective_workers(workers);
    #[cfg(feature = "parallel")]
    if w > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
        return Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()));
    }
    let _ = w;
    Ok((0..n).map(f).collect())
}

// ====================================================================== samplers

/// Kanter: S with E[e^{−uS}] = e^{−u^α}, 0 < α < 1.
pub fn sample_pos_stable(alpha: f64, rng: &mut impl Rng) -> f64 {
    let u = PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = ((1.0 - alpha) * u).sin() / e;
    a * b.powf((1.0 - alpha) / alpha)
}

/// Chambers–Mallows–Stuck with skewness −1: X with E[e^{uX}] = e^{u^α}, 1 < α < 2.
pub fn sample_neg_stable(alpha: f64, rng: &mut impl Rng) -> f64 {
    let beta = -1.0;
    let t = (PI * alpha / 2.0).tan();
    let b = (beta * t).atan() / alpha;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let x = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
        * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
    // γ^α = |cos(πα/2)| turns e^{u^α/|cos|} into e^{u^α}
    x * (PI * alpha / 2.0).cos().abs().powf(1.0 / alpha)
}

/// Law of a single jump size (a positive magnitude).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    Const { x: f64 },
    Exp { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    /// min(J, e) with e ~ Exp(rate) independent.
    MinExp { base: Box<JumpLaw>, rate: f64 },
    /// Inverse of a tabulated, decreasing tail on an increasing grid.
    Table { y: Vec<f64>, tail: Vec<f64> },
}

impl JumpLaw {
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            JumpLaw::Const { x } => *x,
            JumpLaw::Exp { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            JumpLaw::Gamma { shape, rate } => GammaDist::new(*shape, 1.0 / rate).expect("validated gamma law").sample(rng),
            JumpLaw::MinExp { base, rate } => {
                let j = base.sample(rng);
                let e: f64 = Exp1.sample(rng);
                j.min(e / rate)
            }
            JumpLaw::Table { y, tail } => {
                // P(J > y) = tail(y)/tail(y₀), log-log interpolation
                let target = tail[0] * rng.random::<f64>();
                let k = tail.partition_point(|&t| t > target);
                if k == 0 {
                    return y[0];
                }
                if k >= y.len() {
                    return y[y.len() - 1];
                }
                let (t0, t1) = (tail[k - 1].ln(), tail[k].ln());
                let w = if t1 < t0 { (target.ln() - t0) / (t1 - t0) } else { 0.0 };
                (y[k - 1].ln() + w * (y[k].ln() - y[k - 1].ln())).exp()
            }
        }
    }

    /// E[e^{−uJ}], used by tests and reports.
    pub fn laplace(&self, u: f64) -> Option<f64> {
        Some(match self {
            JumpLaw::Const { x } => (-u * x).exp(),
            JumpLaw::Exp { rate } => rate / (rate + u),
            JumpLaw::Gamma { shape, rate } => (rate / (rate + u)).powf(*shape),
            JumpLaw::MinExp { base, rate } => {
                // E[e^{−u min(J,e)}] = r/(u+r) + u/(u+r)·E[e^{−(u+r)J}]
                rate / (u + rate) + u / (u + rate) * base.laplace(u + rate)?
            }
            JumpLaw::Table { .. } => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompoundPoisson {
    pub rate: f64,
    pub law: JumpLaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StablePart {
    /// E[e^{−uS_t}] = e^{−t·scale·u^α}.
    Positive { alpha: f64, scale: f64 },
    /// E[e^{−uS_t}] = e^{−t·scale·((u+β)^α − β^α)}.
    Tempered { alpha: f64, tempering: f64, scale: f64 },
    /// E[e^{uX_t}] = e^{t·scale·u^α}.
    Negative { alpha: f64, scale: f64 },
}

impl StablePart {
    fn sample(&self, dt: f64, rng: &mut impl Rng) -> f64 {
        match *self {
            StablePart::Positive { alpha, scale } => (scale * dt).powf(1.0 / alpha) * sample_pos_stable(alpha, rng),
            StablePart::Tempered { alpha, tempering, scale } => {
                let c = (scale * dt).powf(1.0 / alpha);
                loop {
                    let s = c * sample_pos_stable(alpha, rng);
                    if rng.random::<f64>() < (-tempering * s).exp() {
                        return s;
                    }
                }
            }
            StablePart::Negative { alpha, scale } => (scale * dt).powf(1.0 / alpha) * sample_neg_stable(alpha, rng),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// ξ = S is non-decreasing; CP jumps are upward.
    Subordinator,
    /// CP jumps are downward.
    SpectrallyNegative,
}

/// ξ_t = drift·t + σB_t + stable part ± compound Poisson jumps, killed at rate κ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Model {
    pub label: String,
    pub kind: ModelKind,
    pub drift: f64,
    pub sigma2: f64,
    pub stable: Option<StablePart>,
    pub cp: Vec<CompoundPoisson>,
    pub kappa: f64,
    /// Truncation level and the variance moved into σ², for general triples.
    pub truncation: Option<(f64, f64)>,
    /// E[ξ₁] = ψ'(0+) when built from an unkilled spectrally negative exponent.
    pub mean: Option<f64>,
}

impl Model {
    fn new(label: String, kind: ModelKind) -> Self {
        Self { label, kind, drift: 0.0, sigma2: 0.0, stable: None, cp: Vec::new(), kappa: 0.0, truncation: None, mean: None }
    }

    /// Builds a simulable model for ψ (or φ).
    pub fn from_exponent(psi: &LaplaceExponent, eta: f64) -> Result<Model> {
        let mut m = Self::build(psi, eta)?;
        if m.kind == ModelKind::SpectrallyNegative && m.kappa == 0.0 {
            let d = exponent::drift_at_zero(psi, 1e-6);
            m.mean = (!d.killed && d.value.is_finite()).then_some(d.value);
        }
        Ok(m)
    }

    fn build(psi: &LaplaceExponent, eta: f64) -> Result<Model> {
        let label = psi.describe();
        let sub = ModelKind::Subordinator;
        let sn = ModelKind::SpectrallyNegative;
        match psi.node() {
            Node::Family(f) => match *f {
                Family::Brownian { sigma2, drift, kappa } => {
                    Ok(Model { drift, sigma2, kappa, ..Model::new(label, sn) })
                }
                Family::Stable { alpha, kappa, c } if c == 0.0 => Ok(Model {
                    stable: Some(StablePart::Negative { alpha, scale: 1.0 }),
                    kappa,
                    ..Model::new(label, sn)
                }),
                Family::StableSub { alpha } => {
                    Ok(Model { stable: Some(StablePart::Positive { alpha, scale: 1.0 }), ..Model::new(label, sub) })
                }
                Family::PoissonSub { q } => Ok(Model {
                    cp: vec![CompoundPoisson { rate: -q.ln(), law: JumpLaw::Const { x: 1.0 } }],
                    ..Model::new(label, sub)
                }),
                Family::QPoissonSub { q } => Ok(Model {
                    cp: vec![CompoundPoisson { rate: 1.0, law: JumpLaw::Const { x: -q.ln() } }],
                    ..Model::new(label, sub)
                }),
                Family::CpExpSub { c, b, kappa } => Ok(Model {
                    cp: vec![CompoundPoisson { rate: c, law: JumpLaw::Exp { rate: b } }],
                    kappa,
                    ..Model::new(label, sub)
                }),
                _ if !f.is_subordinator() => match f.to_triple() {
                    Some(t) => Model::from_triple(&t, eta, label),
                    None => Err(Error::Unavailable(format!("no sampler for {label}"))),
                },
                _ => Err(Error::Unavailable(format!("no sampler for {label}"))),
            },
            Node::Triple(t) => Model::from_triple(t, eta, label),
            Node::T { base, delta, beta, .. } if delta == beta && base.is_subordinator() => {
                Model::from_exponent(base, eta)?.t_beta(*beta)
            }
            Node::Esscher { .. } | Node::T { .. } | Node::Composed { .. } | Node::Shift { .. } if !psi.is_subordinator() => {
                match psi.to_triple() {
                    Some(t) => Model::from_triple(&t, eta, label),
                    None => Err(Error::Unavailable(format!("no sampler for {label}"))),
                }
            }
            _ => Err(Error::Unavailable(format!("no sampler for {label}"))),
        }
    }

    /// Spectrally negative triple: jumps below η become Gaussian, the rest
    /// compound Poisson drawn by tail inversion.
    pub fn from_triple(t: &LevyTriple, eta: f64, label: String) -> Result<Model> {
        t.validate()?;
        let jumps = &t.jumps;
        let mut cp = Vec::new();
        let atoms = jumps.atoms();
        for &(at, m) in &atoms {
            if at.abs() >= eta && m > 0.0 {
                cp.push(CompoundPoisson { rate: m, law: JumpLaw::Const { x: -at } });
            }
        }
        let atom_tail = |y: f64| atoms.iter().filter(|(a, _)| -a > y).map(|(_, m)| m).sum::<f64>();
        let cont = |y: f64| (jumps.tail(y) - atom_tail(y)).max(0.0);
        let t0 = cont(eta);
        if t0 > 0.0 {
            let mut y = Vec::new();
            let mut tail = Vec::new();
            let mut x = eta;
            while x < 1e12 {
                let v = cont(x);
                y.push(x);
                tail.push(v);
                if v < 1e-13 * t0 {
                    break;
                }
                x *= 1.01;
            }
            cp.push(CompoundPoisson { rate: t0, law: JumpLaw::Table { y, tail } });
        }
        let small = jumps.small_jump_variance(eta)?;
        let drift = t.a - jumps.mid_jump_mean(eta)?;
        Ok(Model {
            label,
            kind: ModelKind::SpectrallyNegative,
            drift,
            sigma2: t.sigma2 + small,
            stable: None,
            cp,
            kappa: t.kappa,
            truncation: Some((eta, small)),
            mean: None,
        })
    }

    /// T_β of a subordinator model: jumps J become min(J, e_β), killing κ
    /// becomes jumps of rate κ with Exp(β) sizes, a stable part becomes
    /// tempered plus Gamma(1−α, β) jumps at rate scale·β^α.
    pub fn t_beta(&self, beta: f64) -> Result<Model> {
        if self.kind != ModelKind::Subordinator {
            return Err(Error::Unavailable("T_beta model images are built for subordinators only".into()));
        }
        if !(beta > 0.0) {
            return Ok(self.clone());
        }
        let mut m = Model::new(format!("T_{beta}[{}]", self.label), ModelKind::Subordinator);
        m.drift = self.drift;
        for c in &self.cp {
            m.cp.push(CompoundPoisson { rate: c.rate, law: JumpLaw::MinExp { base: Box::new(c.law.clone()), rate: beta } });
        }
        if self.kappa > 0.0 {
            m.cp.push(CompoundPoisson { rate: self.kappa, law: JumpLaw::Exp { rate: beta } });
        }
        match self.stable {
            None => {}
            Some(StablePart::Positive { alpha, scale }) => {
                m.stable = Some(StablePart::Tempered { alpha, tempering: beta, scale });
                m.cp.push(CompoundPoisson { rate: scale * beta.powf(alpha), law: JumpLaw::Gamma { shape: 1.0 - alpha, rate: beta } });
            }
            Some(_) => return Err(Error::Unavailable("T_beta of a tempered stable model".into())),
        }
        Ok(m)
    }

    fn is_cp_drift(&self) -> bool {
        self.stable.is_none() && self.sigma2 == 0.0
    }

    fn total_rate(&self) -> f64 {
        self.cp.iter().map(|c| c.rate).sum()
    }

    fn sample_jump(&self, rng: &mut impl Rng) -> f64 {
        let total = self.total_rate();
        let mut u = total * rng.random::<f64>();
        for c in &self.cp {
            if u < c.rate {
                return c.law.sample(rng);
            }
            u -= c.rate;
        }
        self.cp[self.cp.len() - 1].law.sample(rng)
    }

    fn jump_sign(&self) -> f64 {
        match self.kind {
            ModelKind::Subordinator => 1.0,
            ModelKind::SpectrallyNegative => -1.0,
        }
    }

    /// One increment of ξ over dt, ignoring killing.
    pub fn step(&self, dt: f64, rng: &mut impl Rng) -> f64 {
        let mut x = self.drift * dt;
        if self.sigma2 > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            x += (self.sigma2 * dt).sqrt() * z;
        }
        if let Some(s) = self.stable {
            x += s.sample(dt, rng);
        }
        let sign = self.jump_sign();
        for c in &self.cp {
            let lam = c.rate * dt;
            if lam <= 0.0 {
                continue;
            }
            let n: f64 = Poisson::new(lam).expect("positive rate").sample(rng);
            for _ in 0..n as u64 {
                x += sign * c.law.sample(rng);
            }
        }
        x
    }

    fn killing_time(&self, rng: &mut impl Rng) -> f64 {
        if self.kappa > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / self.kappa
        } else {
            f64::INFINITY
        }
    }
}

/// n i.i.d. increments over dt.
pub fn sample_increments(model: &Model, dt: f64, n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| model.step(dt, rng)).collect()
}

// ====================================================================== exponential functionals

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntegrationMethod {
    /// Event-driven, exact between jumps.
    Exact,
    /// Trapezoid on a fixed grid.
    Trapezoid { dt: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpFunSamples {
    pub model: String,
    pub method: IntegrationMethod,
    pub samples: Vec<f64>,
    /// Mean and max over paths of the estimated mass beyond the stopping time.
    pub residual_mean: f64,
    pub residual_max: f64,
}

fn check_drift(psi: &LaplaceExponent, model: &Model) -> Result<Option<f64>> {
    match model.kind {
        ModelKind::Subordinator => {
            let p1 = psi.eval(1.0)?;
            if !(p1 > 0.0) {
                return Err(Error::Validation(format!("phi(1) = {p1}: the functional is infinite")));
            }
            // E[I] = 1/φ(1)
            Ok(Some(1.0 / p1))
        }
        ModelKind::SpectrallyNegative => {
            let d = exponent::drift_at_zero(psi, 1e-6);
            if !(d.killed || d.value > 0.0) {
                return Err(Error::Validation(format!(
                    "psi'(0+) = {} <= 0: xi does not drift to infinity, the functional is infinite",
                    d.value
                )));
            }
            Ok(None)
        }
    }
}

fn exp_functional_exact(model: &Model, cfg: &SimConfig, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let d = model.drift;
    let rate = model.total_rate();
    let kill = model.killing_time(rng);
    let end = match cfg.horizon {
        Horizon::Fixed { t } => t.min(kill),
        Horizon::Adaptive => kill,
    };
    let sign = model.jump_sign();
    let (mut xi, mut t, mut acc) = (0.0f64, 0.0f64, 0.0f64);
    loop {
        let h = if rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / rate
        } else {
            f64::INFINITY
        };
        let seg_end = (t + h).min(end);
        let len = seg_end - t;
        let part = if len.is_infinite() {
            if d > 0.0 {
                1.0 / d
            } else {
                return Err(Error::Validation("no drift and no jumps: the functional is infinite".into()));
            }
        } else if d != 0.0 {
            -(-d * len).exp_m1() / d
        } else {
            len
        };
        acc += (-xi).exp() * part;
        if seg_end >= end || len.is_infinite() {
            return Ok((acc, 0.0));
        }
        xi += d * len;
        t = seg_end;
        xi += sign * model.sample_jump(rng);
        if cfg.horizon == Horizon::Adaptive && (-xi).exp() < cfg.eps {
            return Ok((acc, (-xi).exp()));
        }
        if t > cfg.max_time {
            return Err(Error::Numerical(format!("path did not drift away by t = {}", cfg.max_time)));
        }
    }
}

fn exp_functional_grid(model: &Model, cfg: &SimConfig, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let kill = model.killing_time(rng);
    let end = match cfg.horizon {
        Horizon::Fixed { t } => t.min(kill),
        Horizon::Adaptive => kill,
    };
    let (mut xi, mut t, mut acc) = (0.0f64, 0.0f64, 0.0f64);
    loop {
        let h = cfg.dt.min(end - t);
        let next = xi + model.step(h, rng);
        acc += 0.5 * h * ((-xi).exp() + (-next).exp());
        xi = next;
        t += h;
        if t >= end {
            return Ok((acc, 0.0));
        }
        if cfg.horizon == Horizon::Adaptive && (-xi).exp() < cfg.eps {
            return Ok((acc, (-xi).exp()));
        }
        if t > cfg.max_time {
            return Err(Error::Numerical(format!("path did not drift away by t = {}", cfg.max_time)));
        }
    }
}

/// Samples of I = ∫₀^{e_κ} e^{−ξ_s} ds, one per path.
pub fn sample_exp_functional(psi: &LaplaceExponent, cfg: &SimConfig) -> Result<ExpFunSamples> {
    cfg.validate()?;
    let model = Model::from_exponent(psi, cfg.eta)?;
    let mean_i = check_drift(psi, &model)?;
    sample_exp_functional_model(&model, mean_i, cfg)
}

/// As [`sample_exp_functional`], for a prepared model. `mean_i` is E[I]
/// when known and scales the residual estimate.
pub fn sample_exp_functional_model(model: &Model, mean_i: Option<f64>, cfg: &SimConfig) -> Result<ExpFunSamples> {
    cfg.validate()?;
    let exact = model.is_cp_drift();
    let out = par_map(cfg.paths, cfg.workers, |i| {
        let mut rng = path_rng(cfg.seed, i as u64);
        if exact {
            exp_functional_exact(model, cfg, &mut rng)
        } else {
            exp_functional_grid(model, cfg, &mut rng)
        }
    })?;
    let mut samples = Vec::with_capacity(cfg.paths);
    let (mut rsum, mut rmax) = (0.0f64, 0.0f64);
    for r in out {
        let (v, tail) = r?;
        // the remaining integral is e^{−ξ_T} times an independent copy of I
        let res = match mean_i {
            Some(m) => tail * m,
            None => cfg.eps * v / (1.0 - cfg.eps) * (tail > 0.0) as u8 as f64,
        };
        rsum += res;
        rmax = rmax.max(res);
        samples.push(v);
    }
    Ok(ExpFunSamples {
        model: model.label.clone(),
        method: if exact { IntegrationMethod::Exact } else { IntegrationMethod::Trapezoid { dt: cfg.dt } },
        residual_mean: rsum / cfg.paths as f64,
        residual_max: rmax,
        samples,
    })
}

// ====================================================================== sliced splitting

#[derive(Clone, Debug, Serialize)]
pub struct SliceSamples {
    pub beta: f64,
    pub t: f64,
    pub method: IntegrationMethod,
    pub spliced: Vec<f64>,
    /// The unspliced path driven by the same increments.
    pub unspliced: Vec<f64>,
}

fn exp_level(beta: f64, rng: &mut impl Rng) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / beta
}

/// Event-driven splicing for drift plus compound Poisson.
fn slice_exact(m: &Model, beta: f64, t: f64, rng: &mut impl Rng) -> (f64, f64) {
    let d = m.drift;
    let rate = m.total_rate();
    let (mut base, mut copy, mut un, mut time) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut level = exp_level(beta, rng);
    let mut next_jump = if rate > 0.0 { exp_level(rate, rng) } else { f64::INFINITY };
    loop {
        let seg_end = next_jump.min(t);
        if d > 0.0 {
            // drift crossings: the copy reaches its level continuously
            loop {
                let need = (level - copy) / d;
                if time + need < seg_end {
                    base += level;
                    un += d * need;
                    time += need;
                    copy = 0.0;
                    level = exp_level(beta, rng);
                } else {
                    break;
                }
            }
        }
        let len = seg_end - time;
        copy += d * len;
        un += d * len;
        time = seg_end;
        if seg_end >= t {
            return (base + copy, un);
        }
        let j = m.sample_jump(rng);
        un += j;
        if copy + j > level {
            base += level;
            copy = 0.0;
            level = exp_level(beta, rng);
        } else {
            copy += j;
        }
        next_jump = time + exp_level(rate, rng);
    }
}

/// Grid splicing; a crossing is localized to the step in which it occurs.
fn slice_grid(m: &Model, beta: f64, t: f64, dt: f64, rng: &mut impl Rng) -> (f64, f64) {
    let (mut base, mut copy, mut un, mut time) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut level = exp_level(beta, rng);
    while time < t {
        let h = dt.min(t - time);
        let inc = m.step(h, rng);
        un += inc;
        if copy + inc > level {
            base += level;
            copy = 0.0;
            level = exp_level(beta, rng);
        } else {
            copy += inc;
        }
        time += h;
    }
    (base + copy, un)
}

/// Gnedin's construction: S_t = S_{T_{i−1}} + min(S⁽ⁱ⁾_{t−T_{i−1}}, e_i) with
/// e_i ~ Exp(β). The output has exponent T_βφ.
pub fn sliced_splitting(phi: &LaplaceExponent, beta: f64, t: f64, cfg: &SimConfig) -> Result<SliceSamples> {
    cfg.validate()?;
    if !phi.is_subordinator() {
        return Err(Error::Validation("sliced splitting needs a subordinator".into()));
    }
    if phi.kappa() > 0.0 {
        return Err(Error::Validation("sliced splitting needs a subordinator without killing".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::Validation(format!("beta must be > 0, got {beta}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Validation(format!("t must be >= 0, got {t}")));
    }
    let m = Model::from_exponent(phi, cfg.eta)?;
    let exact = m.is_cp_drift();
    let out = par_map(cfg.paths, cfg.workers, |i| {
        let mut rng = path_rng(cfg.seed, i as u64);
        if t == 0.0 {
            (0.0, 0.0)
        } else if exact {
            slice_exact(&m, beta, t, &mut rng)
        } else {
            slice_grid(&m, beta, t, cfg.dt, &mut rng)
        }
    })?;
    let (spliced, unspliced) = out.into_iter().unzip();
    Ok(SliceSamples {
        beta,
        t,
        method: if exact { IntegrationMethod::Exact } else { IntegrationMethod::Trapezoid { dt: cfg.dt } },
        spliced,
        unspliced,
    })
}

// ====================================================================== Lamperti

/// ξ on a time grid, piecewise linear between knots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub killed_at: Option<f64>,
}

/// ξ on [0, horizon] at step dt, from 0.
pub fn simulate_path(model: &Model, horizon: f64, dt: f64, rng: &mut impl Rng) -> PathSample {
    let kill = model.killing_time(rng);
    let end = horizon.min(kill);
    let mut times = vec![0.0];
    let mut values = vec![0.0];
    let mut t = 0.0;
    let mut x = 0.0;
    while t < end {
        let h = dt.min(end - t);
        x += model.step(h, rng);
        t += h;
        times.push(t);
        values.push(x);
    }
    PathSample { times, values, killed_at: (kill <= horizon).then_some(kill) }
}

/// X on its natural clock: knots (Σ_k, x0·e^{ξ_k}).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LampertiPath {
    pub alpha: f64,
    pub x0: f64,
    pub clock: Vec<f64>,
    pub values: Vec<f64>,
    /// Absorption time at 0 when ξ is killed.
    pub absorbed_at: Option<f64>,
    #[serde(skip)]
    path: PathSample,
}

/// Σ_s = ∫₀ˢ e^{αξ_u}du with ξ₀ = log x0, A_t its inverse, X_t = exp(ξ_{A_t}).
/// Exact for the piecewise-linear path.
pub fn lamperti(path: &PathSample, alpha: f64, x0: f64) -> Result<LampertiPath> {
    if !(x0 > 0.0) {
        return Err(Error::Validation(format!("x0 must be > 0, got {x0}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::Validation(format!("alpha must be > 0, got {alpha}")));
    }
    let lx = x0.ln();
    let mut clock = vec![0.0];
    let mut sigma = 0.0;
    for k in 0..path.times.len() - 1 {
        let h = path.times[k + 1] - path.times[k];
        let m = (path.values[k + 1] - path.values[k]) / h;
        let e = (alpha * (lx + path.values[k])).exp();
        let seg = if (alpha * m * h).abs() < 1e-12 { e * h } else { e * (alpha * m * h).exp_m1() / (alpha * m) };
        sigma += seg;
        clock.push(sigma);
    }
    let values = path.values.iter().map(|v| x0 * v.exp()).collect();
    Ok(LampertiPath {
        alpha,
        x0,
        absorbed_at: path.killed_at.map(|_| sigma),
        clock,
        values,
        path: path.clone(),
    })
}

impl LampertiPath {
    /// X_t; an error if the path ends before Σ reaches t.
    pub fn at(&self, t: f64) -> Result<f64> {
        if let Some(a) = self.absorbed_at {
            if t >= a {
                return Ok(0.0);
            }
        }
        let last = self.clock[self.clock.len() - 1];
        if !(t < last) {
            return Err(Error::Numerical(format!("horizon not reached: clock ends at {last} < {t}")));
        }
        let k = self.clock.partition_point(|&c| c <= t) - 1;
        let p = &self.path;
        let h = p.times[k + 1] - p.times[k];
        let m = (p.values[k + 1] - p.values[k]) / h;
        let r = t - self.clock[k];
        let e = (-self.alpha * (self.x0.ln() + p.values[k])).exp();
        let am = self.alpha * m;
        let ds = if (am * h).abs() < 1e-12 { r * e } else { (r * am * e).ln_1p() / am };
        Ok(self.x0 * (p.values[k] + m * ds).exp())
    }
}

/// X_t from x0 for each path, extending ξ in chunks until Σ exceeds t.
///
/// When ξ drifts to −∞ the clock converges, and X is absorbed at 0 once the
/// clock still to come, x0^α e^{αξ} times an independent copy of ∫e^{αξ},
/// could only reach t if that copy exceeded 1/ε.
pub fn lamperti_samples(model: &Model, alpha: f64, x0: f64, t: f64, cfg: &SimConfig, stream_offset: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let drifts_down = model.mean.is_some_and(|m| m < 0.0);
    let out = par_map(cfg.paths, cfg.workers, |i| -> Result<f64> {
        let mut rng = path_rng(cfg.seed, stream_offset + i as u64);
        let mut horizon = 1.0;
        let mut path = simulate_path(model, horizon, cfg.dt, &mut rng);
        loop {
            let lp = lamperti(&path, alpha, x0)?;
            match lp.at(t) {
                Ok(v) => return Ok(v),
                Err(_) if drifts_down && absorbed(&lp, t, cfg.eps) => return Ok(0.0),
                Err(_) if horizon < cfg.max_time && path.killed_at.is_none() => {
                    // extend with fresh increments
                    let more = simulate_path(model, horizon, cfg.dt, &mut rng);
                    let (t0, x0p) = (path.times[path.times.len() - 1], path.values[path.values.len() - 1]);
                    path.times.extend(more.times[1..].iter().map(|s| s + t0));
                    path.values.extend(more.values[1..].iter().map(|v| v + x0p));
                    path.killed_at = more.killed_at.map(|k| k + t0);
                    horizon *= 2.0;
                }
                Err(e) => return Err(e),
            }
        }
    })?;
    out.into_iter().collect()
}

fn absorbed(lp: &LampertiPath, t: f64, eps: f64) -> bool {
    let (last, x) = (lp.clock[lp.clock.len() - 1], lp.values[lp.values.len() - 1]);
    x.powf(lp.alpha) < eps * (t - last)
}

// ====================================================================== comparisons

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Moment { order: f64, value: f64 },
    Laplace { u: f64, value: f64 },
    BinMass { lo: f64, hi: f64, mass: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetRow {
    pub target: Target,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub n: usize,
    pub rows: Vec<TargetRow>,
    pub pass: bool,
}

/// Mean and standard error, summed in sample order.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// z-scores |estimate − target|/SE; passes if every z ≤ 3.
pub fn mc_compare(samples: &[f64], targets: &[Target]) -> Result<McReport> {
    if samples.is_empty() {
        return Err(Error::Validation("no samples".into()));
    }
    let mut rows = Vec::with_capacity(targets.len());
    for &tg in targets {
        let (vals, want): (Vec<f64>, f64) = match tg {
            Target::Moment { order, value } => (samples.iter().map(|x| x.powf(order)).collect(), value),
            Target::Laplace { u, value } => (samples.iter().map(|x| (-u * x).exp()).collect(), value),
            Target::BinMass { lo, hi, mass } => {
                (samples.iter().map(|&x| if x >= lo && x < hi { 1.0 } else { 0.0 }).collect(), mass)
            }
        };
        let (m, se) = mean_se(&vals);
        let diff = (m - want).abs();
        let z = if se > 0.0 {
            diff / se
        } else if diff <= 1e-12 * want.abs().max(1.0) {
            0.0
        } else {
            return Err(Error::Numerical(format!("zero sample variance but estimate {m} differs from target {want}")));
        };
        rows.push(TargetRow { target: tg, estimate: m, se, z, pass: z <= 3.0 });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(McReport { n: samples.len(), rows, pass })
}

/// Two-sample z-score for E[Xᵏ] = E[Yᵏ].
pub fn two_sample_z(x: &[f64], y: &[f64], order: i32) -> f64 {
    let a: Vec<f64> = x.iter().map(|v| v.powi(order)).collect();
    let b: Vec<f64> = y.iter().map(|v| v.powi(order)).collect();
    let (ma, sa) = mean_se(&a);
    let (mb, sb) = mean_se(&b);
    (ma - mb).abs() / (sa * sa + sb * sb).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailFit {
    /// Slope of log density vs log x by weighted regression on log bins.
    pub slope: f64,
    /// −(Hill index) − 1 on the same upper fraction.
    pub hill_slope: f64,
    pub bins: usize,
    pub threshold: f64,
}

/// Density slope over the largest `frac` of the samples.
pub fn tail_slope(samples: &[f64], frac: f64) -> Result<TailFit> {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite() && *x > 0.0).collect();
    if xs.len() < 100 {
        return Err(Error::Validation("tail fit needs at least 100 positive samples".into()));
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = xs.len();
    let k = ((n as f64 * frac) as usize).max(20);
    let thr = xs[n - k - 1];
    let top = &xs[n - k..];
    let hill = top.iter().map(|x| (x / thr).ln()).sum::<f64>() / k as f64;
    let (lo, hi) = (thr.ln(), top[top.len() - 1].ln());
    let nb = 40usize;
    let w = (hi - lo) / nb as f64;
    let mut counts = vec![0usize; nb];
    for x in top {
        let b = (((x.ln() - lo) / w) as usize).min(nb - 1);
        counts[b] += 1;
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut used = 0;
    for (b, &c) in counts.iter().enumerate() {
        if c < 10 {
            continue;
        }
        let (a, bb) = (lo + w * b as f64, lo + w * (b + 1) as f64);
        let width = bb.exp() - a.exp();
        let x = 0.5 * (a + bb);
        let y = (c as f64 / (n as f64 * width)).ln();
        let wt = c as f64;
        sw += wt;
        sx += wt * x;
        sy += wt * y;
        sxx += wt * x * x;
        sxy += wt * x * y;
        used += 1;
    }
    if used < 3 {
        return Err(Error::Numerical("too few populated bins for a tail fit".into()));
    }
    let slope = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    Ok(TailFit { slope, hill_slope: -1.0 / hill - 1.0, bins: used, threshold: thr })
}

/// i.i.d. draws from a factor product, one stream per sample.
pub fn sample_factor(d: &crate::expfunctional::DistributionFactor, cfg: &SimConfig) -> Result<Vec<f64>> {
    let out = par_map(cfg.paths, cfg.workers, |i| d.sample(&mut path_rng(cfg.seed, i as u64)))?;
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform;
    use proptest::prelude::*;
    use rand::Rng;

    fn fam(f: Family) -> LaplaceExponent {
        LaplaceExponent::family(f).unwrap()
    }

    fn cfg(paths: usize) -> SimConfig {
        SimConfig { paths, workers: 1, ..Default::default() }
    }

    #[test]
    fn increments() {
        let mut rng = path_rng(1, 0);
        let bm = Model::from_exponent(&fam(Family::Brownian { sigma2: 1.0, drift: 0.0, kappa: 0.0 }), 1e-3).unwrap();
        let n = 100_000;
        let xs = sample_increments(&bm, 1.0, n, &mut rng);
        assert!(mean_se(&xs).0.abs() < 4.0 / (n as f64).sqrt());
        let st = Model::from_exponent(&fam(Family::StableSub { alpha: 0.5 }), 1e-3).unwrap();
        let xs = sample_increments(&st, 1.0, n, &mut rng);
        let r = mc_compare(&xs, &[Target::Laplace { u: 1.0, value: (-1.0f64).exp() }]).unwrap();
        assert!(r.pass, "{r:?}");
        let p = Model::from_exponent(&fam(Family::PoissonSub { q: (-1.0f64).exp() }), 1e-3).unwrap();
        let xs = sample_increments(&p, 2.0, n, &mut rng);
        let r = mc_compare(&xs, &[Target::Moment { order: 1.0, value: 2.0 }]).unwrap();
        assert!(r.pass, "{r:?}");
        // spectrally negative stable: E[e^{uX_1}] = e^{u^α}
        let ns = Model::from_exponent(&fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 }), 1e-3).unwrap();
        let xs = sample_increments(&ns, 0.5, n, &mut rng);
        let ys: Vec<f64> = xs.iter().map(|x| -x).collect();
        let r = mc_compare(&ys, &[Target::Laplace { u: 0.5, value: (0.5 * 0.5f64.powf(1.5)).exp() }]).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn general_triple_matches_direct_sampler() {
        // Stable(1.5) through its triple: E[e^{uX_1}] = e^{u^α} at u = 0.5
        let psi = fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 });
        let t = psi.to_triple().unwrap();
        let m = Model::from_triple(&t, 1e-3, "triple".into()).unwrap();
        let (eta, var) = m.truncation.unwrap();
        assert_eq!(eta, 1e-3);
        assert!(var > 0.0 && var < 1e-1);
        let mut rng = path_rng(2, 0);
        let xs = sample_increments(&m, 0.5, 50_000, &mut rng);
        let ys: Vec<f64> = xs.iter().map(|x| -x).collect();
        let want = (0.5 * psi.psi(0.5).unwrap()).exp();
        let r = mc_compare(&ys, &[Target::Laplace { u: 0.5, value: want }]).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn exp_functional_examples() {
        // pure drift: I = 1 exactly
        let drift = LaplaceExponent::custom("drift", |u| u, 0.0, true);
        let m = Model { drift: 1.0, ..Model::new("drift".into(), ModelKind::Subordinator) };
        let s = sample_exp_functional_model(&m, Some(1.0), &cfg(10)).unwrap();
        assert!(s.samples.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(matches!(Model::from_exponent(&drift, 1e-3), Err(Error::Unavailable(_))));
        let cp = fam(Family::CpExpSub { c: 1.0, b: 1.0, kappa: 1.0 });
        let s = sample_exp_functional(&cp, &cfg(40_000)).unwrap();
        assert_eq!(s.method, IntegrationMethod::Exact);
        let r = mc_compare(&s.samples, &[Target::Moment { order: 1.0, value: 2.0 / 3.0 }]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(s.residual_max < 1e-6);
        // no drift condition
        let bad = fam(Family::Brownian { sigma2: 1.0, drift: -0.5, kappa: 0.0 });
        assert!(sample_exp_functional(&bad, &cfg(10)).is_err());
    }

    #[test]
    fn exp_functional_brownian() {
        // u² + u: I = 1/e₁, so E[1/I] = 1 and E[e^{−1/I}] = 1/2
        let b = fam(Family::Brownian { sigma2: 2.0, drift: 1.0, kappa: 0.0 });
        let c = SimConfig { dt: 0.005, ..cfg(20_000) };
        let s = sample_exp_functional(&b, &c).unwrap();
        let inv: Vec<f64> = s.samples.iter().map(|x| 1.0 / x).collect();
        let r = mc_compare(&inv, &[Target::Moment { order: 1.0, value: 1.0 }, Target::Laplace { u: 1.0, value: 0.5 }]).unwrap();
        assert!(r.pass, "{r:?}");
        let top = s.samples.iter().cloned().fold(0.0, f64::max);
        assert!(s.residual_max <= (1.0 + 1e-12) * c.eps / (1.0 - c.eps) * top);
    }

    #[test]
    fn wrong_target_fails() {
        let cp = fam(Family::CpExpSub { c: 1.0, b: 1.0, kappa: 1.0 });
        let s = sample_exp_functional(&cp, &cfg(20_000)).unwrap();
        let r = mc_compare(&s.samples, &[Target::Moment { order: 1.0, value: 2.0 }]).unwrap();
        assert!(!r.pass && r.rows[0].z > 3.0);
        assert!(mc_compare(&[1.0, 1.0], &[Target::Moment { order: 1.0, value: 2.0 }]).is_err());
        assert!(mc_compare(&[], &[]).is_err());
    }

    #[test]
    fn t_beta_model_matches_exponent() {
        // Laplace transform of one increment of the T_β model vs T_βφ
        let phi = fam(Family::StableSub { alpha: 0.5 });
        let m = Model::from_exponent(&transform::t_beta(&phi, 1.0).unwrap(), 1e-3).unwrap();
        let tb = transform::t_beta(&phi, 1.0).unwrap();
        let mut rng = path_rng(3, 0);
        let xs = sample_increments(&m, 0.5, 60_000, &mut rng);
        for u in [0.5, 2.0] {
            let want = (-0.5 * tb.eval(u).unwrap()).exp();
            let r = mc_compare(&xs, &[Target::Laplace { u, value: want }]).unwrap();
            assert!(r.pass, "{r:?}");
        }
        // killing turns into Exp(β) jumps; the law of J: E[e^{−u min(J,e)}]
        let cp = fam(Family::CpExpSub { c: 1.0, b: 2.0, kappa: 0.5 });
        let m = Model::from_exponent(&cp, 1e-3).unwrap().t_beta(1.5).unwrap();
        let tb = transform::t_beta(&cp, 1.5).unwrap();
        for u in [0.3, 1.0, 4.0] {
            let phi_m: f64 = m.cp.iter().map(|c| c.rate * (1.0 - c.law.laplace(u).unwrap())).sum();
            assert!((phi_m - tb.eval(u).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn slicing_examples() {
        let phi = fam(Family::CpExpSub { c: 2.0, b: 1.0, kappa: 0.0 });
        let c = cfg(40_000);
        let s = sliced_splitting(&phi, 1.0, 1.0, &c).unwrap();
        assert_eq!(s.method, IntegrationMethod::Exact);
        let tb = transform::t_beta(&phi, 1.0).unwrap();
        for u in [0.5, 1.0, 2.0] {
            let r = mc_compare(&s.spliced, &[Target::Laplace { u, value: (-tb.eval(u).unwrap()).exp() }]).unwrap();
            assert!(r.pass, "u = {u}: {r:?}");
        }
        assert!(s.spliced.iter().zip(&s.unspliced).all(|(a, b)| a <= b));
        let s0 = sliced_splitting(&phi, 1.0, 0.0, &cfg(5)).unwrap();
        assert!(s0.spliced.iter().all(|&v| v == 0.0));
        // larger β gives smaller values
        let s4 = sliced_splitting(&phi, 4.0, 1.0, &c).unwrap();
        assert!(mean_se(&s4.spliced).0 < mean_se(&s.spliced).0);
        assert!(sliced_splitting(&fam(Family::CpExpSub { c: 1.0, b: 1.0, kappa: 0.3 }), 1.0, 1.0, &c).is_err());
    }

    #[test]
    fn slicing_stable_on_grid() {
        let phi = fam(Family::StableSub { alpha: 0.5 });
        let c = SimConfig { dt: 1e-3, ..cfg(10_000) };
        let s = sliced_splitting(&phi, 1.0, 0.5, &c).unwrap();
        let tb = transform::t_beta(&phi, 1.0).unwrap();
        for u in [0.5, 1.0, 2.0] {
            let r = mc_compare(&s.spliced, &[Target::Laplace { u, value: (-0.5 * tb.eval(u).unwrap()).exp() }]).unwrap();
            assert!(r.pass, "u = {u}: {r:?}");
        }
        assert!(s.spliced.iter().zip(&s.unspliced).all(|(a, b)| a <= b));
    }

    #[test]
    fn lamperti_examples() {
        let flat = PathSample { times: vec![0.0, 1.0, 2.0], values: vec![0.0; 3], killed_at: None };
        let lp = lamperti(&flat, 1.0, 2.0).unwrap();
        for t in [0.0, 0.7, 3.9] {
            assert_eq!(lp.at(t).unwrap(), 2.0);
        }
        assert!(lp.at(4.0).is_err());
        // ξ_t = t: Σ_s = e^s − 1, X_t = 1 + t
        let times: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64).collect();
        let lin = PathSample { values: times.clone(), times, killed_at: None };
        let lp = lamperti(&lin, 1.0, 1.0).unwrap();
        for t in [0.0, 0.3, 1.0, 5.5, 19.0] {
            assert!((lp.at(t).unwrap() - (1.0 + t)).abs() < 1e-12 * (1.0 + t));
        }
        assert!(lamperti(&lin, 1.0, 0.0).is_err());
    }

    #[test]
    fn lamperti_absorbs_when_xi_drifts_down() {
        // ψ(u) = u² − u: ψ(1) = 0, so X is a martingale absorbed at 0
        let model = Model::from_exponent(&fam(Family::Brownian { sigma2: 2.0, drift: -1.0, kappa: 0.0 }), 1e-3).unwrap();
        assert_eq!(model.mean, Some(-1.0));
        let xs = lamperti_samples(&model, 1.0, 1.0, 0.5, &SimConfig { dt: 0.01, ..cfg(4000) }, 0).unwrap();
        assert!(xs.iter().any(|&x| x == 0.0));
        let (m, se) = mean_se(&xs);
        assert!((m - 1.0).abs() < 3.0 * se, "{m} ± {se}");
    }

    #[test]
    fn determinism_across_workers() {
        let phi = fam(Family::StableSub { alpha: 0.5 });
        let a = sample_exp_functional(&phi, &SimConfig { workers: 1, ..cfg(500) }).unwrap();
        let b = sample_exp_functional(&phi, &SimConfig { workers: 3, ..cfg(500) }).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn tail_fit_on_pareto() {
        // density slope −1.5 for P(X > x) = x^{−1/2}
        let mut rng = path_rng(9, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>().powf(-2.0)).collect();
        let f = tail_slope(&xs, 0.1).unwrap();
        assert!((f.slope + 1.5).abs() < 0.05, "{f:?}");
        assert!((f.hill_slope + 1.5).abs() < 0.05, "{f:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn subordinator_paths_nondecreasing(seed in 0u64..1000, alpha in 0.1f64..0.9) {
            let m = Model::from_exponent(&fam(Family::StableSub { alpha }), 1e-3).unwrap();
            let p = simulate_path(&m, 1.0, 0.05, &mut path_rng(seed, 0));
            prop_assert!(p.values.windows(2).all(|w| w[1] >= w[0]));
            prop_assert!(p.times.windows(2).all(|w| w[1] > w[0]));
        }

        #[test]
        fn spliced_below_unspliced(seed in 0u64..1000, beta in 0.1f64..5.0, t in 0.1f64..3.0) {
            let phi = fam(Family::CpExpSub { c: 1.5, b: 0.7, kappa: 0.0 });
            let s = sliced_splitting(&phi, beta, t, &SimConfig { seed, ..cfg(50) }).unwrap();
            prop_assert!(s.spliced.iter().zip(&s.unspliced).all(|(a, b)| a <= b));
        }
    }
}
