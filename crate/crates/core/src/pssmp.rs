//! Entrance laws J_ψ of positive self-similar Markov processes issued
//! from 0, their Beta intertwinings, and the eigenfunction series
//! I_ψ(z) = Σ zⁿ/∏_{k≤n}ψ(k).

use crate::error::{Error, Result};
use crate::exponent::{self, Family, LaplaceExponent, Node};
use crate::expfunctional::{self, ek_multiplier, DistributionFactor, Factor};
use crate::specfun::{ln_gamma, ln_gamma_c, SeriesValue};
use crate::transform;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// Which existence result applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// ψ'(0+) ≥ 0 and no killing.
    NonnegativeDrift,
    /// min(ψ(0), ψ'(0+)) < 0 and Cramér root θ < 1.
    RecurrentExtension { theta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntranceLaw {
    pub exponent: String,
    pub regime: Regime,
    /// `moments[n] = E[J_ψⁿ]`.
    pub moments: Vec<f64>,
}

/// ∏_{k≤n}ψ(k)/Γ(n+1), n = 0..N, with no regime check.
pub fn moment_products(psi: &LaplaceExponent, n: usize) -> Result<Vec<f64>> {
    let mut m = Vec::with_capacity(n + 1);
    m.push(1.0);
    for k in 1..=n {
        let prev = m[k - 1];
        m.push(prev * psi.psi(k as f64)? / k as f64);
    }
    Ok(m)
}

fn regime(psi: &LaplaceExponent) -> Result<Regime> {
    let p0 = psi.psi(0.0)?;
    let d = exponent::drift_at_zero(psi, 1e-6);
    if p0.abs() <= 1e-12 && !d.killed && d.value >= -1e-9 {
        return Ok(Regime::NonnegativeDrift);
    }
    if p0 < 0.0 || d.value < 0.0 {
        let theta = psi.theta()?;
        if theta < 1.0 {
            return Ok(Regime::RecurrentExtension { theta });
        }
        return Err(Error::Validation(format!("recurrent extension needs theta < 1, got theta = {theta}")));
    }
    Err(Error::Validation(format!("no entrance law: psi(0) = {p0}, psi'(0+) = {}", d.value)))
}

/// E[J_ψⁿ] = ∏ψ(k)/Γ(n+1) for n = 0..N.
pub fn entrance_moments(psi: &LaplaceExponent, n: usize) -> Result<EntranceLaw> {
    if psi.is_subordinator() {
        return Err(Error::Validation("entrance laws are defined for spectrally negative exponents".into()));
    }
    let regime = regime(psi)?;
    let moments = moment_products(psi, n)?;
    if let Regime::RecurrentExtension { .. } = regime {
        for k in 1..=n {
            let v = psi.psi(k as f64)?;
            if !(v > 0.0) {
                return Err(Error::Numerical(format!("psi({k}) = {v} should be positive when theta < 1")));
            }
        }
    }
    Ok(EntranceLaw { exponent: psi.describe(), regime, moments })
}

/// J_ψ = B(1−θ, θ)/I_{T_{1−θ}ψ_θ}.
#[derive(Clone, Debug, Serialize)]
pub struct EntranceFactorization {
    pub theta: f64,
    /// θ = 1: the Beta factor is B(0, 1), a point mass at 0.
    pub degenerate_at_zero: bool,
    pub law: DistributionFactor,
}

/// Needs min(ψ(0), ψ'(0+)) < 0 and θ ≤ 1. At θ = 1 the law is the point
/// mass at 0 and is returned flagged rather than rejected.
pub fn entrance_factorization(psi: &LaplaceExponent, ladder_len: usize) -> Result<EntranceFactorization> {
    let p0 = psi.psi(0.0)?;
    let d = exponent::drift_at_zero(psi, 1e-6);
    if !(p0 < 0.0 || d.value < 0.0) {
        return Err(Error::Validation(format!(
            "need min(psi(0), psi'(0+)) < 0, got ({p0}, {})",
            d.value
        )));
    }
    let theta = psi.theta()?;
    if theta > 1.0 + 1e-12 {
        return Err(Error::Validation(format!("need theta < 1, got {theta}")));
    }
    let degenerate = (theta - 1.0).abs() <= 1e-12;
    let shifted = transform::shift(psi, theta)?;
    let inner = transform::t_beta(&shifted, 1.0 - theta.min(1.0))?;
    let mut factors = Vec::new();
    if degenerate {
        factors.push(Factor::Const { c: 0.0 });
    } else if theta > 1e-14 {
        factors.push(Factor::Beta { a: 1.0 - theta, b: theta, power: 1.0 });
    }
    factors.push(Factor::ExpFunctional {
        exponent: inner.describe(),
        ladder: expfunctional::sn_neg_moments(&inner, ladder_len)?,
        power: -1.0,
    });
    Ok(EntranceFactorization {
        theta,
        degenerate_at_zero: degenerate,
        law: DistributionFactor::new(format!("J under {}", psi.describe()), factors),
    })
}

// ====================================================================== Mellin profiles

type LnMellin = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// s ↦ E[J^{is}] on a real grid, with a scan for zeros.
#[derive(Clone, Serialize)]
pub struct MellinProfile {
    pub label: String,
    pub s: Vec<f64>,
    pub modulus: Vec<f64>,
    /// Smallest |M| at a refined local minimum, relative to its neighbours.
    pub min_relative_dip: f64,
    pub nonvanishing: bool,
    #[serde(skip)]
    ln_m: LnMellin,
}

impl fmt::Debug for MellinProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MellinProfile[{}; nonvanishing = {}]", self.label, self.nonvanishing)
    }
}

impl MellinProfile {
    /// E[J^z] for complex z.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.ln_m)(z).exp()
    }
}

/// ln E[J_ψ^z] where a closed form is known.
fn closed_ln_mellin(psi: &LaplaceExponent) -> Option<(String, LnMellin)> {
    let one = Complex64::new(1.0, 0.0);
    match psi.node() {
        Node::Family(Family::StableSub { .. }) => None,
        Node::Family(Family::Stable { alpha, kappa, c }) if *kappa == 0.0 && *c == 0.0 => {
            let a = *alpha;
            Some((format!("u^{a}"), Arc::new(move |z| (a - 1.0) * ln_gamma_c(z + one))))
        }
        Node::Family(Family::Brownian { sigma2, drift, kappa }) if *kappa == 0.0 && *sigma2 > 0.0 && *drift >= 0.0 => {
            let (s2, a) = (*sigma2, 2.0 * drift / sigma2);
            Some((
                "brownian".into(),
                Arc::new(move |z| z * (s2 / 2.0).ln() + ln_gamma_c(z + 1.0 + a) - ln_gamma(1.0 + a)),
            ))
        }
        Node::Family(Family::MittagLefflerSn { alpha }) => {
            let a = *alpha;
            Some((
                format!("(alpha u - 1)_alpha, alpha = {a}"),
                Arc::new(move |z| ln_gamma_c(a * (z + one) - 1.0) - ln_gamma(a - 1.0) - ln_gamma_c(z + one)),
            ))
        }
        Node::Shift { base, theta } => match base.as_family()? {
            Family::MittagLefflerSn { alpha } if (theta - 1.0 / alpha).abs() < 1e-14 => {
                let a = *alpha;
                Some((
                    format!("(alpha u)_alpha, alpha = {a}"),
                    Arc::new(move |z| ln_gamma_c(a * (z + one)) - ln_gamma(a) - ln_gamma_c(z + one)),
                ))
            }
            Family::PochhammerSn { alpha } if *theta == 1.0 => {
                let a = *alpha;
                Some((
                    format!("(u)_alpha, alpha = {a}"),
                    Arc::new(move |z| ln_gamma_c(z + 1.0 + a) - ln_gamma(1.0 + a) - 2.0 * ln_gamma_c(z + one)),
                ))
            }
            _ => None,
        },
        _ => None,
    }
}

/// Scans |M(is)| over `s_grid`. Each interior local minimum of log|M| is
/// refined by golden section and flagged if it falls below 1e−8 of the
/// smaller neighbour. The ratio is relative because Gamma-type profiles
/// decay exponentially in |s| without vanishing.
pub fn mellin_profile(psi: &LaplaceExponent, s_grid: &[f64]) -> Result<MellinProfile> {
    let (label, ln_m) = closed_ln_mellin(psi)
        .ok_or_else(|| Error::Unavailable(format!("no Mellin representation for {}", psi.describe())))?;
    let (logs, min_dip) = scan_zeros(&ln_m, s_grid);
    Ok(MellinProfile {
        label,
        s: s_grid.to_vec(),
        modulus: logs.iter().map(|l| l.exp()).collect(),
        min_relative_dip: min_dip,
        nonvanishing: min_dip >= 1e-8,
        ln_m,
    })
}

/// log|M(is)| on the grid and the smallest refined relative dip.
fn scan_zeros(ln_m: &LnMellin, s_grid: &[f64]) -> (Vec<f64>, f64) {
    let lnmod = |s: f64| ln_m(Complex64::new(0.0, s)).re;
    let logs: Vec<f64> = s_grid.iter().map(|&s| lnmod(s)).collect();
    let mut min_dip: f64 = 1.0;
    for i in 1..logs.len().saturating_sub(1) {
        if logs[i] < logs[i - 1] && logs[i] < logs[i + 1] {
            let (mut a, mut b) = (s_grid[i - 1], s_grid[i + 1]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if lnmod(c) < lnmod(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let lo = lnmod(0.5 * (a + b));
            min_dip = min_dip.min((lo - logs[i - 1].min(logs[i + 1])).exp());
        }
    }
    (logs, min_dip)
}

/// The default scan grid, s ∈ [−50, 50] at step 0.05.
pub fn default_s_grid() -> Vec<f64> {
    (0..=2000).map(|i| -50.0 + 0.05 * i as f64).collect()
}

// ====================================================================== intertwining

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IntertwiningCase {
    /// J_{T_{δ,θ}ψ} = B(1+θ−δ, δ)·J_{ψ_θ}.
    ShiftedTransform = 1,
    /// J_ψ = B(1−θ, θ)·J_{T_{−θ}ψ_θ}.
    NegativeShift = 2,
    /// J_{T_{δ,0}ψ} = B(1−δ, δ)·J_ψ.
    ZeroDrift = 3,
}

impl IntertwiningCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::ShiftedTransform),
            2 => Ok(Self::NegativeShift),
            3 => Ok(Self::ZeroDrift),
            _ => Err(Error::Validation(format!("case must be 1, 2 or 3, got {i}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub transformed: f64,
    pub beta_moment: f64,
    pub partner: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Intertwining {
    pub case: IntertwiningCase,
    pub delta: f64,
    pub theta: f64,
    /// Beta(a, b); b = 0 means the point mass at 1.
    pub beta_a: f64,
    pub beta_b: f64,
    pub transformed: String,
    pub partner: String,
    /// Case 1 with θ ≤ δ < θ+1: the moment identity is defined there but
    /// the density-level statements need δ < θ.
    pub ambiguous_band: bool,
    /// None when no closed Mellin form is known for the partner.
    pub mellin_nonvanishing: Option<bool>,
    pub moments: Vec<MomentRow>,
    pub max_rel_err: f64,
    #[serde(skip)]
    pub transformed_exponent: Option<LaplaceExponent>,
    #[serde(skip)]
    pub partner_exponent: Option<LaplaceExponent>,
}

/// E[B(a,b)ⁿ] = Γ(a+n)Γ(a+b)/(Γ(a)Γ(a+b+n)), with B(0, b) = 0.
fn beta_moment(a: f64, b: f64, n: usize) -> f64 {
    let nf = n as f64;
    if b == 0.0 || n == 0 {
        return 1.0;
    }
    if a == 0.0 {
        return 0.0;
    }
    (ln_gamma(a + nf) + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(a + b + nf)).exp()
}

/// Builds the Beta factor and partner for each case and checks the
/// moment identity for n = 1..N.
pub fn intertwining_factor(psi: &LaplaceExponent, delta: f64, case: IntertwiningCase, n: usize) -> Result<Intertwining> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Validation(format!("delta must be >= 0, got {delta}")));
    }
    let p0 = psi.psi(0.0)?;
    let d = exponent::drift_at_zero(psi, 1e-6);
    let (theta, transformed, partner, a, b, band) = match case {
        IntertwiningCase::ShiftedTransform => {
            if !(d.value < 0.0 || d.killed) {
                return Err(Error::Validation(format!("case 1 needs psi'(0+) < 0, got {}", d.value)));
            }
            let theta = psi.theta()?;
            if !(delta < theta + 1.0) {
                return Err(Error::Validation(format!("case 1 needs delta < theta + 1 = {}", theta + 1.0)));
            }
            let t = transform::t_transform(psi, delta, theta)?;
            (theta, t, transform::shift(psi, theta)?, 1.0 + theta - delta, delta, delta >= theta)
        }
        IntertwiningCase::NegativeShift => {
            if !(p0 < 0.0 || d.value < 0.0) {
                return Err(Error::Validation("case 2 needs min(psi(0), psi'(0+)) < 0".into()));
            }
            let theta = psi.theta()?;
            if !(theta < 1.0) {
                return Err(Error::Validation(format!("case 2 needs theta < 1, got {theta}")));
            }
            (theta, psi.clone(), transform::neg_theta_shift(psi, theta)?, 1.0 - theta, theta, false)
        }
        IntertwiningCase::ZeroDrift => {
            if !(delta < 1.0) {
                return Err(Error::Validation(format!("case 3 needs delta < 1, got {delta}")));
            }
            let t = transform::t_transform(psi, delta, 0.0)?;
            (0.0, t, psi.clone(), 1.0 - delta, delta, false)
        }
    };
    let mellin_nonvanishing = match mellin_profile(&partner, &default_s_grid()) {
        Ok(p) => Some(p.nonvanishing),
        Err(Error::Unavailable(_)) => None,
        Err(e) => return Err(e),
    };
    if mellin_nonvanishing == Some(false) {
        return Err(Error::Numerical(format!("Mellin transform of J under {} appears to vanish", partner.describe())));
    }
    let lhs = moment_products(&transformed, n)?;
    let rhs = moment_products(&partner, n)?;
    let mut rows = Vec::with_capacity(n);
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        let bm = beta_moment(a, b, k);
        let r = bm * rhs[k];
        let e = (lhs[k] - r).abs() / lhs[k].abs().max(f64::MIN_POSITIVE);
        worst = worst.max(e);
        rows.push(MomentRow { n: k, transformed: lhs[k], beta_moment: bm, partner: rhs[k], rel_err: e });
    }
    Ok(Intertwining {
        case,
        delta,
        theta,
        beta_a: a,
        beta_b: b,
        transformed: transformed.describe(),
        partner: partner.describe(),
        ambiguous_band: band,
        mellin_nonvanishing,
        moments: rows,
        max_rel_err: worst,
        transformed_exponent: Some(transformed),
        partner_exponent: Some(partner),
    })
}

// ====================================================================== series

/// Σ aₙzⁿ with stored coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSeries {
    pub label: String,
    pub coeffs: Vec<f64>,
}

impl PowerSeries {
    /// Sums until |aₙxⁿ| < 1e−16·|partial sum|. Running out of stored
    /// coefficients first is an error.
    pub fn eval(&self, x: f64) -> Result<SeriesValue> {
        let mut sum = 0.0;
        let mut big: f64 = 0.0;
        let mut xn = 1.0;
        for (n, &a) in self.coeffs.iter().enumerate() {
            let t = a * xn;
            sum += t;
            big = big.max(t.abs());
            if n > 0 && t.abs() < 1e-16 * sum.abs() {
                return Ok(SeriesValue {
                    value: sum,
                    err_est: t.abs() + f64::EPSILON * big,
                    terms: n + 1,
                    ill_conditioned: big > 1e8 * sum.abs(),
                });
            }
            xn *= x;
        }
        Err(Error::Numerical(format!(
            "series {} not converged at x = {x} after {} terms",
            self.label,
            self.coeffs.len()
        )))
    }
}

/// aₙ = 1/∏_{k≤n}ψ(k), n = 0..N (N ≤ 500).
pub fn eigen_series(psi: &LaplaceExponent, n: usize) -> Result<PowerSeries> {
    let n = n.min(500);
    let mut c = Vec::with_capacity(n + 1);
    c.push(1.0);
    for k in 1..=n {
        let p = psi.psi(k as f64)?;
        if p == 0.0 {
            return Err(Error::Domain(format!("psi({k}) = 0, the series is undefined")));
        }
        let prev = c[k - 1];
        c.push(prev / p);
    }
    Ok(PowerSeries { label: format!("I[{}]", psi.describe()), coeffs: c })
}

/// Termwise action of 𝐃^{α,δ}: coefficient n times its monomial eigenvalue.
/// δ < 0 is the formal inverse kernel and is accepted where the Gamma
/// arguments stay positive.
pub fn ek_on_series(p: &PowerSeries, alpha: f64, delta: f64) -> Result<PowerSeries> {
    let coeffs = p
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, &a)| Ok(a * ek_multiplier(alpha, delta, n as f64)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerSeries { label: format!("D^{{{alpha},{delta}}}{}", p.label), coeffs })
}

/// Γ(α)E_{α,α}(x) as a series: coefficients Γ(α)/Γ(α(n+1)).
pub fn gamma_ml_series(alpha: f64, n: usize) -> PowerSeries {
    let c = (0..=n).map(|k| (ln_gamma(alpha) - ln_gamma(alpha * (k as f64 + 1.0))).exp()).collect();
    PowerSeries { label: format!("Gamma({alpha}) E_{{{alpha},{alpha}}}"), coeffs: c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma, mittag_leffler, wright_2f2};
    use proptest::prelude::*;

    fn fam(f: Family) -> LaplaceExponent {
        LaplaceExponent::family(f).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn entrance_examples() {
        let b = fam(Family::Brownian { sigma2: 2.0, drift: 1.0, kappa: 0.0 });
        let l = entrance_moments(&b, 2).unwrap();
        assert_eq!(l.regime, Regime::NonnegativeDrift);
        assert_eq!(l.moments[1], b.psi(1.0).unwrap());
        assert!(rel(l.moments[2], 6.0) < 1e-15);
        let ml = fam(Family::MittagLefflerSn { alpha: 1.5 });
        let l = entrance_moments(&ml, 1).unwrap();
        assert!(matches!(l.regime, Regime::RecurrentExtension { theta } if (theta - 2.0 / 3.0).abs() < 1e-12));
        assert!(rel(l.moments[1], gamma(2.0) / gamma(0.5)) < 1e-13);
        // θ = 1 is outside the recurrent regime
        assert!(entrance_moments(&fam(Family::LampertiStableSn { alpha: 1.5 }), 3).is_err());
        // u² − 2u has θ = 2
        assert!(entrance_moments(&fam(Family::Brownian { sigma2: 2.0, drift: -2.0, kappa: 0.0 }), 3).is_err());
    }

    #[test]
    fn entrance_factorization_brownian() {
        let b = fam(Family::Brownian { sigma2: 2.0, drift: -0.5, kappa: 0.0 });
        let f = entrance_factorization(&b, 6).unwrap();
        assert!((f.theta - 0.5).abs() < 1e-14);
        let m = entrance_moments(&b, 6).unwrap();
        assert!(rel(f.law.moment(1.0).unwrap(), 0.5) < 1e-10);
        for n in 1..=6 {
            assert!(rel(f.law.moment(n as f64).unwrap(), m.moments[n]) < 1e-10, "n = {n}");
        }
        assert!(f.law.moment(0.5).is_err());
    }

    #[test]
    fn entrance_factorization_boundary() {
        // θ = 1: Beta(0, 1) is the point mass at 0 and ψ(1) = 0, so both sides vanish
        let psi = fam(Family::LampertiStableSn { alpha: 1.5 });
        let f = entrance_factorization(&psi, 6).unwrap();
        assert!(f.degenerate_at_zero);
        let m = moment_products(&psi, 6).unwrap();
        for n in 1..=6 {
            assert_eq!(f.law.moment(n as f64).unwrap(), 0.0);
            assert!(m[n].abs() < 1e-15);
        }
    }

    #[test]
    fn intertwining_examples() {
        let ml = fam(Family::MittagLefflerSn { alpha: 1.5 });
        let th = 2.0 / 3.0;
        // case 1 mean ratio is the Beta mean
        let c1 = intertwining_factor(&ml, 0.5, IntertwiningCase::ShiftedTransform, 6).unwrap();
        assert!(rel(c1.moments[0].beta_moment, (1.0 + th - 0.5) / (1.0 + th)) < 1e-14);
        assert!(c1.max_rel_err < 1e-10);
        assert_eq!(c1.mellin_nonvanishing, Some(true));
        assert!(!c1.ambiguous_band);
        let c1b = intertwining_factor(&ml, 1.0, IntertwiningCase::ShiftedTransform, 6).unwrap();
        assert!(c1b.ambiguous_band && c1b.max_rel_err < 1e-10);
        assert!(intertwining_factor(&ml, 1.7, IntertwiningCase::ShiftedTransform, 6).is_err());
        let c2 = intertwining_factor(&ml, 0.0, IntertwiningCase::NegativeShift, 6).unwrap();
        assert!(c2.max_rel_err < 1e-10);
        // case 3 on u^1.5: Γ(1.5)/Γ(0.5) = 0.5 at n = 1
        let st = fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 });
        let c3 = intertwining_factor(&st, 0.5, IntertwiningCase::ZeroDrift, 6).unwrap();
        assert!(rel(c3.moments[0].beta_moment, 0.5) < 1e-14);
        assert!(c3.max_rel_err < 1e-10);
        assert_eq!(c3.mellin_nonvanishing, Some(true));
        // δ = 0 is the identity
        let c0 = intertwining_factor(&st, 0.0, IntertwiningCase::ZeroDrift, 3).unwrap();
        assert!(c0.moments.iter().all(|r| r.beta_moment == 1.0));
        assert!(intertwining_factor(&ml, 0.5, IntertwiningCase::ZeroDrift, 3).is_err());
    }

    #[test]
    fn mellin_examples() {
        let ml = fam(Family::MittagLefflerSn { alpha: 1.5 });
        let s = transform::shift(&ml, 2.0 / 3.0).unwrap();
        let p = mellin_profile(&s, &default_s_grid()).unwrap();
        assert!((p.eval(Complex64::new(0.0, 0.0)) - 1.0).norm() < 1e-14);
        let one = Complex64::new(1.0, 1.0);
        let want = crate::specfun::gamma_c(1.5 * one) / (gamma(1.5) * crate::specfun::gamma_c(one));
        assert!((p.eval(Complex64::new(0.0, 1.0)) - want).norm() < 1e-12 * want.norm());
        assert!(want.norm() > 0.1);
        assert!(p.nonvanishing);
        // the Mellin transform matches integer moments
        let m = entrance_moments(&transform::shift(&ml, 2.0 / 3.0).unwrap(), 4);
        if let Ok(m) = m {
            for n in 1..=4 {
                assert!(rel(p.eval(Complex64::new(n as f64, 0.0)).re, m.moments[n]) < 1e-12);
            }
        }
        let st = fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 });
        let q = mellin_profile(&st, &default_s_grid()).unwrap();
        assert!(q.nonvanishing);
        // absolute modulus drops far below 1e−8 at the grid ends without a zero
        assert!(q.modulus[0] < 1e-8);
        assert!(mellin_profile(&fam(Family::StableSub { alpha: 0.5 }), &[0.0]).is_err());
    }

    #[test]
    fn mellin_scan_detects_a_zero() {
        // M(is) = 3.02² − s² vanishes between grid points
        let ln_m: LnMellin = Arc::new(|z: Complex64| (z * z + 3.02 * 3.02).ln());
        let (_, dip) = scan_zeros(&ln_m, &default_s_grid());
        assert!(dip < 1e-8, "{dip}");
        let smooth: LnMellin = Arc::new(|z: Complex64| ln_gamma_c(z + 1.0));
        assert!(scan_zeros(&smooth, &default_s_grid()).1 >= 1e-8);
    }

    #[test]
    fn series_examples() {
        let alpha = 1.5;
        let ml = fam(Family::MittagLefflerSn { alpha });
        let s1 = transform::shift(&ml, 1.0 / alpha).unwrap();
        let p = eigen_series(&s1, 200).unwrap();
        assert_eq!(p.coeffs[0], 1.0);
        for x in [0.5, 1.0, 2.0, -1.0] {
            let v = p.eval(x).unwrap().value;
            let want = gamma(alpha) * mittag_leffler(alpha, alpha, x).unwrap().value;
            assert!(rel(v, want) < 1e-13, "x = {x}");
        }
        let st = fam(Family::Stable { alpha, kappa: 0.0, c: 0.0 });
        let q = eigen_series(&st, 10).unwrap();
        for n in 0..=10 {
            assert!(rel(q.coeffs[n], gamma(n as f64 + 1.0).powf(-alpha)) < 1e-13);
        }
        assert!(eigen_series(&fam(Family::LampertiStableSn { alpha }), 3).is_err());
        let short = PowerSeries { label: "short".into(), coeffs: vec![1.0, 1.0] };
        assert!(short.eval(0.5).is_err());
    }

    #[test]
    fn corollary_coefficients() {
        // I_{T_{δ,θ}ψ} from I_{ψ_θ}: the formal kernel (θ, −δ), or the Markov kernel (θ−δ, δ) the other way
        for (psi, delta) in [
            (fam(Family::MittagLefflerSn { alpha: 1.5 }), 0.5),
            (fam(Family::LampertiStableSn { alpha: 1.5 }), 0.5),
        ] {
            let th = psi.theta().unwrap();
            let a = eigen_series(&transform::shift(&psi, th).unwrap(), 30).unwrap();
            let t = eigen_series(&transform::t_transform(&psi, delta, th).unwrap(), 30).unwrap();
            let fwd = ek_on_series(&a, th, -delta).unwrap();
            let back = ek_on_series(&t, th - delta, delta).unwrap();
            for n in 0..=30 {
                assert!(rel(fwd.coeffs[n], t.coeffs[n]) < 1e-10, "n = {n}");
                assert!(rel(back.coeffs[n], a.coeffs[n]) < 1e-10, "n = {n}");
            }
            // the kernel (θ, δ) applied forward is off from n = 1
            let lit = ek_on_series(&a, th, delta).unwrap();
            assert!(rel(lit.coeffs[1], t.coeffs[1]) > 1e-2);
        }
    }

    #[test]
    fn wright_matches_series() {
        let (alpha, delta) = (1.5, 0.5);
        let th = 1.0 / alpha;
        let s = ek_on_series(&gamma_ml_series(alpha, 200), th, -delta).unwrap();
        for x in [0.5, 1.0, 2.0] {
            let w = wright_2f2(alpha, delta, x).unwrap().value;
            assert!((s.eval(x).unwrap().value - w).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ek_series_is_multiplicative(alpha in -0.5f64..3.0, d1 in 0.05f64..2.0, d2 in 0.05f64..2.0) {
            let p = PowerSeries { label: "ones".into(), coeffs: vec![1.0; 25] };
            let two = ek_on_series(&ek_on_series(&p, alpha, d1).unwrap(), alpha + d1, d2).unwrap();
            let one = ek_on_series(&p, alpha, d1 + d2).unwrap();
            prop_assert_eq!(one.coeffs[0], 1.0);
            for n in 0..25 {
                prop_assert!(rel(two.coeffs[n], one.coeffs[n]) <= 1e-12);
            }
        }

        #[test]
        fn eigen_recursion(s2 in 0.1f64..3.0, mu in 0.0f64..2.0, alpha in 1.05f64..1.95) {
            for psi in [fam(Family::Brownian { sigma2: s2, drift: mu, kappa: 0.0 }), fam(Family::MittagLefflerSn { alpha })] {
                let p = eigen_series(&psi, 40).unwrap();
                for n in 1..=40 {
                    let r = p.coeffs[n] * psi.psi(n as f64).unwrap();
                    prop_assert!(rel(r, p.coeffs[n - 1]) <= 1e-14);
                }
            }
        }

        #[test]
        fn intertwining_all_cases(alpha in 1.1f64..1.9, frac in 0.05f64..0.95, s2 in 0.5f64..3.0, mu in 0.05f64..0.4) {
            let ml = fam(Family::MittagLefflerSn { alpha });
            let th = 1.0 / alpha;
            let c1 = intertwining_factor(&ml, frac * (th + 1.0), IntertwiningCase::ShiftedTransform, 6).unwrap();
            prop_assert!(c1.max_rel_err <= 1e-10);
            let c2 = intertwining_factor(&ml, 0.0, IntertwiningCase::NegativeShift, 6).unwrap();
            prop_assert!(c2.max_rel_err <= 1e-10);
            let b = fam(Family::Brownian { sigma2: s2, drift: -mu, kappa: 0.0 });
            if b.theta().unwrap() < 1.0 {
                let c = intertwining_factor(&b, 0.0, IntertwiningCase::NegativeShift, 6).unwrap();
                prop_assert!(c.max_rel_err <= 1e-10);
                let f = entrance_factorization(&b, 6).unwrap();
                let m = moment_products(&b, 6).unwrap();
                for n in 1..=6 {
                    prop_assert!(rel(f.law.moment(n as f64).unwrap(), m[n]) <= 1e-10);
                }
            }
            let st = fam(Family::Stable { alpha, kappa: 0.0, c: 0.0 });
            let c3 = intertwining_factor(&st, frac, IntertwiningCase::ZeroDrift, 6).unwrap();
            prop_assert!(c3.max_rel_err <= 1e-10);
        }
    }
}
