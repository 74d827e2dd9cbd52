//! Exponential functionals I = ∫₀^∞ e^{−ξ_s} ds (up to the killing time).
//!
//! Integer moments come from the product formulas; fractional moments
//! only where a factorization or a closed Mellin transform is known.
//! Laws are represented three ways: symbolic products of Beta/Gamma
//! factors ([`DistributionFactor`]), Mellin transforms ([`MellinHandle`])
//! and densities ([`DensityHandle`]).

use crate::error::{Error, Result};
use crate::exponent::{self, Family, LaplaceExponent, Node};
use crate::quad::{self, Tol};
use crate::specfun::{self, gamma, gamma_ratio, ln_gamma};
use crate::transform;
use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

// ====================================================================== ladders

/// Which side of zero the ladder indexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSign {
    /// `values[n] = E[Iⁿ]`, subordinator case.
    Positive,
    /// `values[n] = E[I^{−n}]`, spectrally negative case.
    Negative,
}

/// Integer moments m_0..m_N.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentLadder {
    pub exponent: String,
    pub sign: MomentSign,
    pub values: Vec<f64>,
}

impl MomentLadder {
    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn require_subordinator(phi: &LaplaceExponent) -> Result<()> {
    if phi.is_subordinator() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{} is not a subordinator exponent", phi.describe())))
    }
}

/// E[I_φⁿ] = n!/∏_{k≤n} φ(k), n = 0..N.
pub fn sub_moments(phi: &LaplaceExponent, n: usize) -> Result<MomentLadder> {
    require_subordinator(phi)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(1.0);
    for k in 1..=n {
        let p = phi.eval(k as f64)?;
        if !(p > 0.0) {
            return Err(Error::Validation(format!("phi({k}) = {p} is not positive")));
        }
        let prev = values[k - 1];
        values.push(prev * k as f64 / p);
    }
    Ok(MomentLadder { exponent: phi.describe(), sign: MomentSign::Positive, values })
}

/// E[I_ψ^{−n}] = ψ'(0+)∏_{k<n} ψ(k)/Γ(n), n = 0..N.
pub fn sn_neg_moments(psi: &LaplaceExponent, n: usize) -> Result<MomentLadder> {
    if psi.is_subordinator() {
        return Err(Error::Validation("sn_neg_moments needs a spectrally negative exponent".into()));
    }
    let p0 = psi.psi(0.0)?;
    if p0.abs() > 1e-12 {
        return Err(Error::Validation(format!("need psi(0) = 0, got {p0}")));
    }
    let d = exponent::drift_at_zero(psi, 1e-6).value;
    if !(d > 0.0) {
        return Err(Error::Validation(format!("need psi'(0+) > 0, got {d}")));
    }
    let mut values = Vec::with_capacity(n + 1);
    values.push(1.0);
    if n >= 1 {
        values.push(d);
    }
    for k in 2..=n {
        let s = (k - 1) as f64;
        let prev = values[k - 1];
        values.push(prev * psi.psi(s)? / s);
    }
    Ok(MomentLadder { exponent: psi.describe(), sign: MomentSign::Negative, values })
}

// ====================================================================== Mellin transforms

type MellinFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// s ↦ E[X^s] on an open strip (lo, hi).
#[derive(Clone)]
pub struct MellinHandle {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
    f: MellinFn,
}

impl fmt::Debug for MellinHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mellin[{}] on ({}, {})", self.label, self.lo, self.hi)
    }
}

impl MellinHandle {
    pub fn new(label: impl Into<String>, lo: f64, hi: f64, f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Self { label: label.into(), lo, hi, f: Arc::new(f) }
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s > self.lo && s < self.hi) {
            return Err(Error::Domain(format!("E[X^{s}] is infinite for {}", self.label)));
        }
        (self.f)(s)
    }

    /// Length-biased image x^β f(x)/E[X^β].
    pub fn tilt(&self, beta: f64) -> Result<Self> {
        let norm = self.eval(beta)?;
        let base = self.clone();
        Ok(MellinHandle::new(
            format!("{} tilted by x^{beta}", self.label),
            self.lo - beta,
            self.hi - beta,
            move |s| Ok(base.eval(s + beta)? / norm),
        ))
    }
}

// ====================================================================== factor products

/// One independent factor raised to a real power.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Const { c: f64 },
    Beta { a: f64, b: f64, power: f64 },
    /// Gamma(a) with unit rate; Gamma(1) is the unit exponential.
    Gamma { a: f64, power: f64 },
    /// An exponential functional known only through integer moments.
    ExpFunctional { exponent: String, ladder: MomentLadder, power: f64 },
}

impl Factor {
    pub fn exp1(power: f64) -> Self {
        Factor::Gamma { a: 1.0, power }
    }

    /// E[Y^s] for this factor Y.
    pub fn mellin(&self, s: f64) -> Result<f64> {
        match self {
            Factor::Const { c } => Ok(c.powf(s)),
            Factor::Beta { a, b, power } => {
                let t = power * s;
                if a + t <= 0.0 {
                    return Err(Error::Domain(format!("E[B({a},{b})^{t}] is infinite")));
                }
                Ok((ln_gamma(a + t) + ln_gamma(a + b) - ln_gamma(*a) - ln_gamma(a + b + t)).exp())
            }
            Factor::Gamma { a, power } => {
                let t = power * s;
                if a + t <= 0.0 {
                    return Err(Error::Domain(format!("E[G({a})^{t}] is infinite")));
                }
                Ok(gamma_ratio(a + t, *a))
            }
            Factor::ExpFunctional { exponent, ladder, power } => {
                let t = power * s;
                let k = t.abs().round();
                let want = match ladder.sign {
                    MomentSign::Positive => t >= 0.0,
                    MomentSign::Negative => t <= 0.0,
                };
                if (t - t.round()).abs() > 1e-12 || !want {
                    return Err(Error::Unavailable(format!(
                        "E[I^{t}] is not available for {exponent}: only integer moments on the ladder side"
                    )));
                }
                ladder.get(k as usize).ok_or_else(|| {
                    Error::Unavailable(format!("ladder for {exponent} is too short for order {k}"))
                })
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Result<f64> {
        Ok(match self {
            Factor::Const { c } => *c,
            Factor::Beta { a, b, power } => {
                let d = BetaDist::new(*a, *b).map_err(|e| Error::Domain(e.to_string()))?;
                d.sample(rng).powf(*power)
            }
            Factor::Gamma { a, power } => {
                let d = GammaDist::new(*a, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
                d.sample(rng).powf(*power)
            }
            Factor::ExpFunctional { exponent, .. } => {
                return Err(Error::Unavailable(format!("no sampler for the law of I under {exponent}")))
            }
        })
    }
}

/// Product of independent factors.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DistributionFactor {
    pub label: String,
    pub factors: Vec<Factor>,
}

impl DistributionFactor {
    pub fn new(label: impl Into<String>, factors: Vec<Factor>) -> Self {
        Self { label: label.into(), factors }
    }

    /// E[X^s] as the product of factor Mellin values.
    pub fn moment(&self, s: f64) -> Result<f64> {
        let mut m = 1.0;
        for f in &self.factors {
            m *= f.mellin(s)?;
        }
        Ok(m)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Result<f64> {
        let mut x = 1.0;
        for f in &self.factors {
            x *= f.sample(rng)?;
        }
        Ok(x)
    }

    /// Mellin handle, available when no factor is moment-only.
    pub fn mellin(&self) -> Result<MellinHandle> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for f in &self.factors {
            let (a, p) = match f {
                Factor::Const { .. } => continue,
                Factor::Beta { a, power, .. } => (*a, *power),
                Factor::Gamma { a, power } => (*a, *power),
                Factor::ExpFunctional { exponent, .. } => {
                    return Err(Error::Unavailable(format!("{exponent} has no Mellin transform here")))
                }
            };
            // a + p·s > 0
            if p > 0.0 {
                lo = lo.max(-a / p);
            } else if p < 0.0 {
                hi = hi.min(-a / p);
            }
        }
        let me = self.clone();
        Ok(MellinHandle::new(self.label.clone(), lo, hi, move |s| me.moment(s)))
    }
}

// ====================================================================== densities

/// Where a density came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Reweighted,
    KernelTransformed,
    Empirical,
}

type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A density on (0, ∞).
#[derive(Clone)]
pub struct DensityHandle {
    pub label: String,
    pub provenance: Provenance,
    f: DensityFn,
}

impl fmt::Debug for DensityHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density[{}, {:?}]", self.label, self.provenance)
    }
}

/// Outcome of a normalization check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub mass: f64,
    pub quad_err: f64,
    pub upper: f64,
    /// Estimated mass beyond `upper` from a local power-law fit.
    pub tail_remainder: f64,
}

impl DensityHandle {
    pub fn new(label: impl Into<String>, provenance: Provenance, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), provenance, f: Arc::new(f) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (self.f)(x)
        }
    }

    fn peak_and_upper(&self) -> (f64, f64) {
        let mut peak: f64 = 0.0;
        let mut x = 1e-6;
        while x < 1e6 {
            peak = peak.max(self.eval(x));
            x *= 1.25;
        }
        let mut upper = 1.0;
        while upper < 1e12 {
            let far = (0..8).map(|j| self.eval(upper * (1.0 + j as f64 / 8.0))).fold(0.0, f64::max);
            if far < 1e-12 * peak {
                break;
            }
            upper *= 2.0;
        }
        (peak, upper)
    }

    /// ∫_0^U x^s f(x) dx, with U where f has fallen below 1e−12 of its peak.
    pub fn moment(&self, s: f64) -> Result<Normalization> {
        let (_, upper) = self.peak_and_upper();
        let g = |x: f64| if x <= 0.0 { 0.0 } else { x.powf(s) * self.eval(x) };
        let tol = Tol::both(1e-13, 1e-11);
        let lo = quad::integrate_left_singular(g, 0.0, 1.0_f64.min(upper), 2.0, tol)?;
        let mut total = lo.value;
        let mut err = lo.err;
        let mut a = 1.0;
        while a < upper {
            let b = (2.0 * a).min(upper);
            let r = quad::integrate(g, a, b, tol)?;
            total += r.value;
            err += r.err;
            a = b;
        }
        // local power law g ≈ C x^p beyond U
        let (g1, g2) = (g(upper / 2.0), g(upper));
        let tail = if g1 > 0.0 && g2 > 0.0 {
            let p = (g2 / g1).ln() / 2f64.ln();
            if p < -1.0 {
                -g2 * upper / (p + 1.0)
            } else {
                g2 * upper
            }
        } else {
            0.0
        };
        Ok(Normalization { mass: total, quad_err: err, upper, tail_remainder: tail })
    }

    pub fn normalization(&self) -> Result<Normalization> {
        self.moment(0.0)
    }
}

// ====================================================================== closed laws

/// Law of I for the subordinator families where one is known.
pub fn sub_law(phi: &LaplaceExponent) -> Option<MellinHandle> {
    match phi.node() {
        Node::Family(f) => family_sub_law(f),
        // T_β image: E[I^{s+β}]/E[I^β]
        Node::T { base, delta, beta, .. } if delta == beta && base.is_subordinator() => {
            sub_law(base).and_then(|m| m.tilt(*beta).ok())
        }
        _ => None,
    }
}

fn family_sub_law(f: &Family) -> Option<MellinHandle> {
    match *f {
        Family::StableSub { alpha } => Some(MellinHandle::new(
            format!("stable subordinator, alpha = {alpha}"),
            -1.0,
            f64::INFINITY,
            move |s| Ok(gamma(1.0 + s).powf(1.0 - alpha)),
        )),
        Family::LampertiStableSub { alpha } => Some(MellinHandle::new(
            format!("Lamperti-stable subordinator, alpha = {alpha}"),
            -1.0,
            f64::INFINITY,
            move |s| Ok((ln_gamma(1.0 + s) + ln_gamma(alpha) - ln_gamma(alpha + alpha * s)).exp()),
        )),
        Family::QPoissonSub { q } => Some(q_poisson_mellin(q, 1.0)),
        // −log q·(1 − e^{−u}) is 1 − q'^u with q' = e^{−1}, scaled by −log q
        Family::PoissonSub { q } => Some(q_poisson_mellin((-1.0f64).exp(), -q.ln())),
        Family::CpExpSub { .. } => cp_exp_law(f, 0.0).ok().and_then(|d| d.mellin().ok()),
        _ => None,
    }
}

/// E[I^s] for φ(u) = scale·(1 − q^u): Γ(1+s)(q^{1+s};q)_∞/((q;q)_∞ scale^s).
fn q_poisson_mellin(q: f64, scale: f64) -> MellinHandle {
    MellinHandle::new(format!("q-Poisson, q = {q}, scale = {scale}"), -1.0, f64::INFINITY, move |s| {
        let num = specfun::q_pochhammer(q.powf(1.0 + s), q, None)?;
        let den = specfun::q_pochhammer(q, q, None)?;
        Ok(gamma(1.0 + s) * num / den / scale.powf(s))
    })
}

/// (κ+c)^{−1}·G(b+β+1)·B(1+β, κ_b), κ_b = κb/(κ+c): the law of I under T_β of c·u/(u+b)+κ.
pub fn cp_exp_law(f: &Family, beta: f64) -> Result<DistributionFactor> {
    let Family::CpExpSub { c, b, kappa } = *f else {
        return Err(Error::Validation("cp_exp_law needs a cp_exp_sub family".into()));
    };
    f.validate()?;
    let kb = kappa * b / (kappa + c);
    let mut factors = vec![Factor::Const { c: 1.0 / (kappa + c) }, Factor::Gamma { a: b + beta + 1.0, power: 1.0 }];
    if kb > 0.0 {
        factors.push(Factor::Beta { a: 1.0 + beta, b: kb, power: 1.0 });
    }
    Ok(DistributionFactor::new(format!("I under T_{beta} of cp_exp_sub(c={c}, b={b}, kappa={kappa})"), factors))
}

/// Fractional moment E[I_φ^s]: the product formula at integers, else a known law.
pub fn sub_fractional_moment(phi: &LaplaceExponent, s: f64) -> Result<f64> {
    require_subordinator(phi)?;
    if s >= 0.0 && s == s.floor() && s <= 400.0 {
        return Ok(sub_moments(phi, s as usize)?.values[s as usize]);
    }
    match sub_law(phi) {
        Some(m) => m.eval(s),
        None => Err(Error::Unavailable(format!(
            "E[I^{s}] needs a factorization, none is known for {}",
            phi.describe()
        ))),
    }
}

/// E[I_{T_βφ}ⁿ] = E[I_φ^{n+β}]/E[I_φ^β], n = 0..N.
pub fn sub_tbeta_moments(phi: &LaplaceExponent, beta: f64, n: usize) -> Result<MomentLadder> {
    if !(beta >= 0.0) {
        return Err(Error::Validation(format!("beta must be >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return sub_moments(phi, n);
    }
    let norm = sub_fractional_moment(phi, beta)?;
    let values = (0..=n).map(|k| Ok(sub_fractional_moment(phi, k as f64 + beta)? / norm)).collect::<Result<Vec<_>>>()?;
    Ok(MomentLadder {
        exponent: format!("T_{beta}[{}]", phi.describe()),
        sign: MomentSign::Positive,
        values,
    })
}

/// Closed laws of I for spectrally negative exponents: Brownian with
/// positive drift, and the shifted Lamperti-stable family.
pub fn sn_law(psi: &LaplaceExponent) -> Option<DistributionFactor> {
    if let Some((s2, mu)) = as_brownian(psi) {
        if s2 > 0.0 && mu > 0.0 {
            // I = (2/σ²)/G(2μ/σ²)
            return Some(DistributionFactor::new(
                format!("I under brownian(sigma2={s2}, drift={mu})"),
                vec![Factor::Const { c: 2.0 / s2 }, Factor::Gamma { a: 2.0 * mu / s2, power: -1.0 }],
            ));
        }
    }
    if let Node::Shift { base, theta } = psi.node() {
        if let Some(Family::LampertiStableSn { alpha }) = base.as_family() {
            if *theta == 1.0 {
                // I = (α−1)^{−1} e₁^{−(α−1)}
                return Some(DistributionFactor::new(
                    format!("I under shifted lamperti_stable_sn(alpha={alpha})"),
                    vec![Factor::Const { c: 1.0 / (alpha - 1.0) }, Factor::exp1(-(alpha - 1.0))],
                ));
            }
        }
    }
    None
}

/// (σ², μ) when ψ(u) = σ²u²/2 + μu with no killing.
fn as_brownian(psi: &LaplaceExponent) -> Option<(f64, f64)> {
    match psi.node() {
        Node::Family(Family::Brownian { sigma2, drift, kappa }) if *kappa == 0.0 => Some((*sigma2, *drift)),
        Node::Shift { base, theta } => {
            let Family::Brownian { sigma2, drift, kappa } = *base.as_family()? else { return None };
            let v = 0.5 * sigma2 * theta * theta + drift * theta - kappa;
            (v.abs() < 1e-12).then_some((sigma2, drift + sigma2 * theta))
        }
        _ => None,
    }
}

/// Fractional moment E[I_ψ^s] in the spectrally negative case.
pub fn sn_fractional_moment(psi: &LaplaceExponent, s: f64) -> Result<f64> {
    if s <= 0.0 && s == s.floor() && s >= -400.0 {
        let n = (-s) as usize;
        return Ok(sn_neg_moments(psi, n)?.values[n]);
    }
    match sn_law(psi) {
        Some(d) => d.moment(s),
        None => Err(Error::Unavailable(format!(
            "E[I^{s}] needs a factorization, none is known for {}",
            psi.describe()
        ))),
    }
}

/// Density reweighting x^{−β} f(x)/E[I^{−β}].
pub fn sn_tbeta_density(f: &DensityHandle, psi: &LaplaceExponent, beta: f64) -> Result<DensityHandle> {
    if !(beta >= 0.0) {
        return Err(Error::Validation(format!("beta must be >= 0, got {beta}")));
    }
    if beta == 0.0 {
        return Ok(f.clone());
    }
    let d = exponent::drift_at_zero(psi, 1e-6).value;
    if !(d > 0.0) {
        return Err(Error::Validation(format!("need psi'(0+) > 0, got {d}")));
    }
    let norm = match sn_fractional_moment(psi, -beta) {
        Ok(v) => v,
        Err(Error::Unavailable(_)) => f.moment(-beta)?.mass,
        Err(e) => return Err(e),
    };
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Numerical(format!("E[I^-{beta}] = {norm} is not a usable normalizer")));
    }
    let base = f.clone();
    Ok(DensityHandle::new(format!("x^-{beta} reweighting of {}", f.label), Provenance::Reweighted, move |x| {
        x.powf(-beta) * base.eval(x) / norm
    }))
}

/// Factorization I_{T_{δ,θ}ψ} = B(θ−δ, δ)^{−1}·I_{ψ_θ}.
#[derive(Clone, Debug, Serialize)]
pub struct BetaFactorization {
    pub theta: f64,
    pub delta: f64,
    pub law: DistributionFactor,
}

/// Requires a positive Cramér root θ (ψ'(0+) < 0 or ψ(0) < 0) and 0 < δ < θ.
pub fn beta_factorization(psi: &LaplaceExponent, delta: f64, ladder_len: usize) -> Result<BetaFactorization> {
    let d0 = exponent::drift_at_zero(psi, 1e-6);
    if !(d0.killed || d0.value < 0.0) {
        return Err(Error::Validation(format!("need psi'(0+) < 0 or killing, got psi'(0+) = {}", d0.value)));
    }
    let theta = psi.theta()?;
    if !(delta > 0.0 && delta < theta) {
        return Err(Error::Validation(format!("need 0 < delta < theta = {theta}, got {delta}")));
    }
    let shifted = transform::shift(psi, theta)?;
    let mut factors = vec![Factor::Beta { a: theta - delta, b: delta, power: -1.0 }];
    match sn_law(&shifted) {
        Some(d) => factors.extend(d.factors),
        None => factors.push(Factor::ExpFunctional {
            exponent: shifted.describe(),
            ladder: sn_neg_moments(&shifted, ladder_len)?,
            power: 1.0,
        }),
    }
    Ok(BetaFactorization {
        theta,
        delta,
        law: DistributionFactor::new(format!("I under T_{{{delta},{theta}}}[{}]", psi.describe()), factors),
    })
}

/// Density of I_{T_{δ,θ}ψ} from that of I_{ψ_θ}: ((θ−δ)/θ)·𝐃^{θ−δ,δ}f.
pub fn sn_tdelta_theta_density(f_shifted: &DensityHandle, theta: f64, delta: f64, tol: f64) -> Result<DensityHandle> {
    if !(delta > 0.0 && delta < theta) {
        return Err(Error::Validation(format!("need 0 < delta < theta = {theta}, got {delta}")));
    }
    let p = ErdelyiKoberParams::new(theta - delta, delta)?;
    let base = f_shifted.clone();
    let c = (theta - delta) / theta;
    Ok(DensityHandle::new(
        format!("Beta kernel image of {}", f_shifted.label),
        Provenance::KernelTransformed,
        move |x| ek_beta_route(|r| base.eval(r), p, x, tol).map(|v| c * v).unwrap_or(f64::NAN),
    ))
}

// ====================================================================== Erdélyi–Kober

/// Parameters of 𝐃^{α,δ}: α > −1, δ > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErdelyiKoberParams {
    pub alpha: f64,
    pub delta: f64,
}

impl ErdelyiKoberParams {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > -1.0 && delta > 0.0) {
            return Err(Error::Validation(format!("need alpha > -1 and delta > 0, got ({alpha}, {delta})")));
        }
        Ok(Self { alpha, delta })
    }
}

/// Eigenvalue of 𝐃^{α,δ} on xⁿ: Γ(α+δ+1)Γ(α+n+1)/(Γ(α+1)Γ(α+δ+n+1)).
/// A negative δ gives the formal inverse kernel, provided α+δ+1 > 0.
pub fn ek_multiplier(alpha: f64, delta: f64, n: f64) -> Result<f64> {
    let args = [alpha + delta + 1.0, alpha + n + 1.0, alpha + 1.0, alpha + delta + n + 1.0];
    if args.iter().any(|&a| a <= 0.0) {
        return Err(Error::Domain(format!("Gamma pole in the kernel eigenvalue at alpha={alpha}, delta={delta}, n={n}")));
    }
    if n == 0.0 {
        return Ok(1.0);
    }
    Ok((ln_gamma(args[0]) + ln_gamma(args[1]) - ln_gamma(args[2]) - ln_gamma(args[3])).exp())
}

/// 𝐃f(x) with both representations and their disagreement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EkValue {
    pub value: f64,
    pub beta_route: f64,
    pub diff: f64,
}

/// ∫₀¹ h(t, 1−t) dt with power singularities at both ends. The closure
/// receives the distance to 1 exactly, which matters when it is tiny.
/// Each half is cut geometrically down to `scale`, where the mass of
/// f(x·) concentrates for large x.
fn unit_interval(mut h: impl FnMut(f64, f64) -> f64, pa: f64, pb: f64, scale: f64, tol: f64) -> Result<f64> {
    let t = Tol::rel(0.05 * tol);
    let half = |g: &mut dyn FnMut(f64) -> f64, p: f64| -> Result<f64> {
        let mut cuts = vec![0.5];
        while cuts[cuts.len() - 1] > scale {
            let c = cuts[cuts.len() - 1] / 4.0;
            cuts.push(c);
        }
        let last = cuts[cuts.len() - 1];
        let mut total = quad::integrate_left_singular(&mut *g, 0.0, last, p, t)?.value;
        for w in cuts.windows(2) {
            total += quad::integrate(&mut *g, w[1], w[0], t)?.value;
        }
        Ok(total)
    };
    let l = half(&mut |x| h(x, 1.0 - x), pa)?;
    let r = half(&mut |v| h(1.0 - v, v), pb)?;
    Ok(l + r)
}

/// Integral route with r = x(1 − t^{1/δ}):
/// 𝐃f(x) = Γ(α+δ+1)/(Γ(α+1)Γ(δ+1)) ∫₀¹ (1−t^{1/δ})^α f(x(1−t^{1/δ})) dt.
fn ek_integral_route(f: impl Fn(f64) -> f64, p: ErdelyiKoberParams, x: f64, tol: f64) -> Result<f64> {
    let ErdelyiKoberParams { alpha, delta } = p;
    let c = (ln_gamma(alpha + delta + 1.0) - ln_gamma(alpha + 1.0) - ln_gamma(delta + 1.0)).exp();
    let g = |t: f64, v: f64| {
        // w = 1 − (1−v)^{1/δ}, accurate for small v
        let w = if t < 0.5 { 1.0 - t.powf(1.0 / delta) } else { -((-v).ln_1p() / delta).exp_m1() };
        if w <= 0.0 {
            return 0.0;
        }
        w.powf(alpha) * f(x * w)
    };
    // near t = 1, w ≈ (1−t)/δ so the integrand behaves like (1−t)^α
    let pb = (1.0 / (1.0 + alpha)).max(1.0);
    Ok(c * unit_interval(g, delta.max(1.0), pb, (1e-3 / x).min(0.5), tol)?)
}

/// Beta-expectation route: E[f(B(α+1, δ)x)].
fn ek_beta_route(f: impl Fn(f64) -> f64, p: ErdelyiKoberParams, x: f64, tol: f64) -> Result<f64> {
    let ErdelyiKoberParams { alpha, delta } = p;
    let a = alpha + 1.0;
    let lnb = ln_gamma(a) + ln_gamma(delta) - ln_gamma(a + delta);
    let g = |b: f64, v: f64| {
        if b <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        (alpha * b.ln() + (delta - 1.0) * v.ln() - lnb).exp() * f(b * x)
    };
    unit_interval(g, (1.0 / a).max(1.0), (1.0 / delta).max(1.0), (1e-3 / x).min(0.5), tol)
}

/// 𝐃^{α,δ}f(x). Errors if the two representations disagree beyond `tol`
/// relative to the larger of the two.
pub fn ek_apply(f: impl Fn(f64) -> f64, p: ErdelyiKoberParams, x: f64, tol: f64) -> Result<EkValue> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Erdelyi-Kober operator needs x > 0, got {x}")));
    }
    let v1 = ek_integral_route(&f, p, x, tol)?;
    let v2 = ek_beta_route(&f, p, x, tol)?;
    let diff = (v1 - v2).abs();
    if !(diff <= tol * v1.abs().max(v2.abs()) + f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("Erdelyi-Kober routes disagree: {v1} vs {v2}")));
    }
    Ok(EkValue { value: v1, beta_route: v2, diff })
}

// ====================================================================== tails

/// f(x) ~ constant·x^power as x → ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailAsymptote {
    pub power: f64,
    pub constant: f64,
}

/// Tail of the density of I under T^β_{δ,θ}ψ, 0 < δ < θ = Cramér root.
///
/// For β = 0 the constant is Γ(θ)E[I_{ψ_θ}^{θ−δ}]/(Γ(δ)Γ(θ−δ)); for β > 0
/// it is divided by E[I_{T_{δ,θ}ψ}^{−β}] = E[B(θ−δ,δ)^β]·E[I_{ψ_θ}^{−β}].
pub fn tail_asymptote(psi: &LaplaceExponent, delta: f64, beta: f64) -> Result<TailAsymptote> {
    if !(beta >= 0.0) {
        return Err(Error::Validation(format!("beta must be >= 0, got {beta}")));
    }
    let fac = beta_factorization(psi, delta, 1)?;
    let theta = fac.theta;
    let shifted = transform::shift(psi, theta)?;
    let pos = sn_fractional_moment(&shifted, theta - delta)?;
    let c0 = (ln_gamma(theta) - ln_gamma(delta) - ln_gamma(theta - delta)).exp() * pos;
    let constant = if beta == 0.0 {
        c0
    } else {
        let b = Factor::Beta { a: theta - delta, b: delta, power: 1.0 }.mellin(beta)?;
        c0 / (b * sn_fractional_moment(&shifted, -beta)?)
    };
    Ok(TailAsymptote { power: delta - theta - beta - 1.0, constant })
}

// ====================================================================== examples

/// Tags for the worked closed-form laws.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExampleLaw {
    /// φ(u) = 1 − q^u: q-series density, reweighted by x^β.
    Poisson { q: f64, beta: f64 },
    /// φ(u) = c·u/(u+b) + κ.
    CpExp { c: f64, b: f64, kappa: f64, beta: f64 },
    /// φ(u) = u^α.
    StableSub { alpha: f64, beta: f64 },
    /// φ(u) = (αu)_α.
    LampertiStableSub { alpha: f64, beta: f64 },
}

/// The representation each example is naturally given in.
#[derive(Clone, Debug)]
pub enum ClosedLaw {
    Density(DensityHandle),
    Factor(DistributionFactor),
    Mellin(MellinHandle),
}

impl ClosedLaw {
    /// E[X^s], by quadrature for densities.
    pub fn moment(&self, s: f64) -> Result<f64> {
        match self {
            ClosedLaw::Density(d) => Ok(d.moment(s)?.mass),
            ClosedLaw::Factor(f) => f.moment(s),
            ClosedLaw::Mellin(m) => m.eval(s),
        }
    }
}

/// Terms of the q-series density Σ (−1)ⁿ e^{−y/qⁿ} q^{n(n−1)/2}/((q;q)_∞(q;q)_n).
pub fn q_series_density(q: f64, y: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Validation(format!("q must be in (0,1), got {q}")));
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let qinf = specfun::q_pochhammer(q, q, None)?;
    let pol = specfun::SeriesEvalPolicy { max_terms: 200, ..Default::default() };
    let mut sum = 0.0;
    let mut qn = 1.0; // (q;q)_n
    let mut sign = 1.0;
    let mut big: f64 = 0.0;
    for n in 0..pol.max_terms {
        let nf = n as f64;
        let ln_t = -y / q.powi(n as i32) + 0.5 * nf * (nf - 1.0) * q.ln();
        let t = sign * ln_t.exp() / qn;
        sum += t;
        big = big.max(t.abs());
        if t.abs() < pol.rel_cutoff * sum.abs() || (t == 0.0 && n > 0) {
            break;
        }
        qn *= 1.0 - q.powi(n as i32 + 1);
        sign = -sign;
    }
    Ok((sum / qinf).max(0.0))
}

pub fn closed_laws(tag: ExampleLaw) -> Result<ClosedLaw> {
    match tag {
        ExampleLaw::Poisson { q, beta } => {
            Family::QPoissonSub { q }.validate()?;
            if !(beta >= 0.0) {
                return Err(Error::Validation("beta must be >= 0".into()));
            }
            let norm = if beta == 0.0 { 1.0 } else { q_poisson_mellin(q, 1.0).eval(beta)? };
            Ok(ClosedLaw::Density(DensityHandle::new(
                format!("q-series density, q = {q}, beta = {beta}"),
                if beta == 0.0 { Provenance::ClosedForm } else { Provenance::Reweighted },
                move |y| y.powf(beta) * q_series_density(q, y).unwrap_or(f64::NAN) / norm,
            )))
        }
        ExampleLaw::CpExp { c, b, kappa, beta } => {
            if !(beta >= 0.0) {
                return Err(Error::Validation("beta must be >= 0".into()));
            }
            Ok(ClosedLaw::Factor(cp_exp_law(&Family::CpExpSub { c, b, kappa }, beta)?))
        }
        ExampleLaw::StableSub { alpha, beta } => {
            let f = Family::StableSub { alpha };
            f.validate()?;
            let m = family_sub_law(&f).expect("stable subordinator law");
            Ok(ClosedLaw::Mellin(if beta == 0.0 { m } else { m.tilt(beta)? }))
        }
        ExampleLaw::LampertiStableSub { alpha, beta } => {
            let f = Family::LampertiStableSub { alpha };
            f.validate()?;
            let m = family_sub_law(&f).expect("Lamperti-stable subordinator law");
            Ok(ClosedLaw::Mellin(if beta == 0.0 { m } else { m.tilt(beta)? }))
        }
    }
}

/// Two product readings of G(β+1)·G(β+1)^{−α} for the Lamperti-stable
/// subordinator, kept to document that neither reproduces the moments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductReading {
    /// Both factors are the same variable: G^{1−α}.
    SameVariable,
    /// Independent copies.
    Independent,
}

pub fn lamperti_stable_sub_product_moment(alpha: f64, beta: f64, s: f64, reading: ProductReading) -> f64 {
    let a = beta + 1.0;
    match reading {
        ProductReading::SameVariable => gamma_ratio(a + (1.0 - alpha) * s, a),
        ProductReading::Independent => {
            if a - alpha * s <= 0.0 {
                return f64::INFINITY;
            }
            gamma_ratio(a + s, a) * gamma_ratio(a - alpha * s, a)
        }
    }
}

/// Density of e₁^{−p} scaled by c: x ↦ density of c·e₁^{−p}.
pub fn scaled_inverse_exp_density(c: f64, p: f64) -> DensityHandle {
    DensityHandle::new(format!("{c}·e1^-{p}"), Provenance::ClosedForm, move |x| {
        let y = x / c;
        let e = y.powf(-1.0 / p);
        e * (-e).exp() / (p * y) / c
    })
}

/// Beta density helper, used by tests and the web demo.
pub fn beta_density(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))).exp()
}
