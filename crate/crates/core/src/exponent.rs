//! Laplace exponents of spectrally negative Lévy processes and subordinators.
//!
//! Internally every exponent is evaluated in the spectrally negative
//! convention ψ. A subordinator with exponent φ is stored as ψ = −φ and
//! flagged, so that [`LaplaceExponent::eval`] hands back φ.

use crate::error::{Error, Result};
use crate::quad::{self, Tol};
use crate::specfun::{self, gamma};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Default absolute tolerance for Lévy–Khintchine quadrature.
pub const LK_TOL: f64 = 1e-10;

// ====================================================================== families

fn zero() -> f64 {
    0.0
}

/// Closed-form families. JSON: `{"family": "<name>", "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// ψ(u) = σ²u²/2 + drift·u − κ
    Brownian {
        sigma2: f64,
        #[serde(default = "zero")]
        drift: f64,
        #[serde(default = "zero")]
        kappa: f64,
    },
    /// ψ(u) = (u+c)^α − c^α − κ, 1 < α < 2
    Stable {
        alpha: f64,
        #[serde(default = "zero")]
        kappa: f64,
        #[serde(default = "zero")]
        c: f64,
    },
    /// ψ(u) = (u−1)_α
    PochhammerSn { alpha: f64 },
    /// ψ(u) = ((α−1)(u−1))_α
    LampertiStableSn { alpha: f64 },
    /// ψ(u) = (α(u−1/α))_α = (αu−1)_α
    MittagLefflerSn { alpha: f64 },
    /// φ(u) = u^α, 0 < α < 1
    StableSub { alpha: f64 },
    /// φ(u) = (αu)_α, 0 < α < 1
    LampertiStableSub { alpha: f64 },
    /// φ(u) = −log(q)(1 − e^{−u}): unit jumps at rate −log q
    PoissonSub { q: f64 },
    /// φ(u) = 1 − q^u: jumps of size −log q at unit rate
    QPoissonSub { q: f64 },
    /// φ(u) = c·u/(u+b) + κ
    CpExpSub {
        c: f64,
        b: f64,
        #[serde(default = "zero")]
        kappa: f64,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Brownian { .. } => "brownian",
            Family::Stable { .. } => "stable",
            Family::PochhammerSn { .. } => "pochhammer_sn",
            Family::LampertiStableSn { .. } => "lamperti_stable_sn",
            Family::MittagLefflerSn { .. } => "mittag_leffler_sn",
            Family::StableSub { .. } => "stable_sub",
            Family::LampertiStableSub { .. } => "lamperti_stable_sub",
            Family::PoissonSub { .. } => "poisson_sub",
            Family::QPoissonSub { .. } => "q_poisson_sub",
            Family::CpExpSub { .. } => "cp_exp_sub",
        }
    }

    pub fn is_subordinator(&self) -> bool {
        matches!(
            self,
            Family::StableSub { .. }
                | Family::LampertiStableSub { .. }
                | Family::PoissonSub { .. }
                | Family::QPoissonSub { .. }
                | Family::CpExpSub { .. }
        )
    }

    /// Parameter range checks.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        let fin = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{name} must be finite")))
            }
        };
        match *self {
            Family::Brownian { sigma2, drift, kappa } => {
                fin("sigma2", sigma2)?;
                fin("drift", drift)?;
                fin("kappa", kappa)?;
                if sigma2 < 0.0 {
                    return bad(format!("sigma2 must be >= 0, got {sigma2}"));
                }
                if kappa < 0.0 {
                    return bad(format!("kappa must be >= 0, got {kappa}"));
                }
            }
            Family::Stable { alpha, kappa, c } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    return bad(format!("stable: alpha must be in (1,2), got {alpha}"));
                }
                if !(kappa >= 0.0 && c >= 0.0) || !kappa.is_finite() || !c.is_finite() {
                    return bad("stable: kappa and c must be finite and >= 0".into());
                }
            }
            Family::PochhammerSn { alpha } | Family::LampertiStableSn { alpha } | Family::MittagLefflerSn { alpha } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    return bad(format!("{}: alpha must be in (1,2), got {alpha}", self.name()));
                }
            }
            Family::StableSub { alpha } | Family::LampertiStableSub { alpha } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return bad(format!("{}: alpha must be in (0,1), got {alpha}", self.name()));
                }
            }
            Family::PoissonSub { q } | Family::QPoissonSub { q } => {
                if !(q > 0.0 && q < 1.0) {
                    return bad(format!("{}: q must be in (0,1), got {q}", self.name()));
                }
            }
            Family::CpExpSub { c, b, kappa } => {
                if !(c > 0.0 && b > 0.0 && kappa >= 0.0) || !(c.is_finite() && b.is_finite() && kappa.is_finite()) {
                    return bad("cp_exp_sub: need c > 0, b > 0, kappa >= 0".into());
                }
            }
        }
        Ok(())
    }

    fn floor(&self) -> f64 {
        match *self {
            Family::Brownian { .. } | Family::PoissonSub { .. } | Family::QPoissonSub { .. } => f64::NEG_INFINITY,
            Family::Stable { c, .. } => -c,
            Family::PochhammerSn { alpha } => 1.0 - alpha,
            Family::LampertiStableSn { alpha } => 1.0 - alpha / (alpha - 1.0),
            Family::MittagLefflerSn { alpha } => (1.0 - alpha) / alpha,
            Family::StableSub { .. } => 0.0,
            Family::LampertiStableSub { .. } => -1.0,
            Family::CpExpSub { b, .. } => -b,
        }
    }

    /// ψ (spectrally negative convention).
    fn psi(&self, u: f64) -> Result<f64> {
        Ok(match *self {
            Family::Brownian { sigma2, drift, kappa } => 0.5 * sigma2 * u * u + drift * u - kappa,
            Family::Stable { alpha, kappa, c } => (u + c).powf(alpha) - c.powf(alpha) - kappa,
            Family::PochhammerSn { alpha } => specfun::pochhammer(u - 1.0, alpha)?,
            Family::LampertiStableSn { alpha } => specfun::pochhammer((alpha - 1.0) * (u - 1.0), alpha)?,
            Family::MittagLefflerSn { alpha } => specfun::pochhammer(alpha * u - 1.0, alpha)?,
            Family::StableSub { alpha } => -u.powf(alpha),
            Family::LampertiStableSub { alpha } => -specfun::pochhammer(alpha * u, alpha)?,
            Family::PoissonSub { q } => q.ln() * (1.0 - (-u).exp()),
            Family::QPoissonSub { q } => -(-(u * q.ln()).exp_m1()),
            Family::CpExpSub { c, b, kappa } => -(c * u / (u + b) + kappa),
        })
    }

    fn dpsi(&self, u: f64) -> Result<f64> {
        Ok(match *self {
            Family::Brownian { sigma2, drift, .. } => sigma2 * u + drift,
            Family::Stable { alpha, c, .. } => alpha * (u + c).powf(alpha - 1.0),
            Family::PochhammerSn { alpha } => specfun::pochhammer_deriv(u - 1.0, alpha)?,
            Family::LampertiStableSn { alpha } => {
                (alpha - 1.0) * specfun::pochhammer_deriv((alpha - 1.0) * (u - 1.0), alpha)?
            }
            Family::MittagLefflerSn { alpha } => alpha * specfun::pochhammer_deriv(alpha * u - 1.0, alpha)?,
            Family::StableSub { alpha } => -alpha * u.powf(alpha - 1.0),
            Family::LampertiStableSub { alpha } => -alpha * specfun::pochhammer_deriv(alpha * u, alpha)?,
            Family::PoissonSub { q } => q.ln() * (-u).exp(),
            Family::QPoissonSub { q } => q.ln() * (u * q.ln()).exp(),
            Family::CpExpSub { c, b, .. } => -c * b / ((u + b) * (u + b)),
        })
    }

    fn psi_c(&self, z: Complex64) -> Complex64 {
        match *self {
            Family::Brownian { sigma2, drift, kappa } => 0.5 * sigma2 * z * z + drift * z - kappa,
            Family::Stable { alpha, kappa, c } => (z + c).powf(alpha) - c.powf(alpha) - kappa,
            Family::PochhammerSn { alpha } => specfun::pochhammer_c(z - 1.0, alpha),
            Family::LampertiStableSn { alpha } => specfun::pochhammer_c((z - 1.0) * (alpha - 1.0), alpha),
            Family::MittagLefflerSn { alpha } => specfun::pochhammer_c(z * alpha - 1.0, alpha),
            Family::StableSub { alpha } => -z.powf(alpha),
            Family::LampertiStableSub { alpha } => -specfun::pochhammer_c(z * alpha, alpha),
            Family::PoissonSub { q } => q.ln() * (1.0 - (-z).exp()),
            Family::QPoissonSub { q } => (z * q.ln()).exp() - 1.0,
            Family::CpExpSub { c, b, kappa } => -(c * z / (z + b) + kappa),
        }
    }

    /// Cramér root when it is available in closed form.
    fn theta(&self) -> Option<f64> {
        match *self {
            Family::Brownian { sigma2, drift, kappa } => {
                if kappa == 0.0 && drift >= 0.0 {
                    Some(0.0)
                } else if sigma2 > 0.0 {
                    let disc = drift * drift + 2.0 * sigma2 * kappa;
                    // larger root, computed without cancellation
                    if drift < 0.0 {
                        Some((-drift + disc.sqrt()) / sigma2)
                    } else {
                        Some(2.0 * kappa / (drift + disc.sqrt()))
                    }
                } else if drift > 0.0 {
                    Some(kappa / drift)
                } else {
                    None
                }
            }
            Family::Stable { alpha, kappa, c } => Some((c.powf(alpha) + kappa).powf(1.0 / alpha) - c),
            Family::PochhammerSn { .. } | Family::LampertiStableSn { .. } => Some(1.0),
            Family::MittagLefflerSn { alpha } => Some(1.0 / alpha),
            _ => None,
        }
    }

    fn unbounded_variation(&self) -> bool {
        match *self {
            Family::Brownian { sigma2, .. } => sigma2 > 0.0,
            Family::Stable { .. }
            | Family::PochhammerSn { .. }
            | Family::LampertiStableSn { .. }
            | Family::MittagLefflerSn { .. } => true,
            _ => false,
        }
    }

    /// Lévy–Khintchine triple, where one is known in closed form.
    pub fn to_triple(&self) -> Option<LevyTriple> {
        match *self {
            Family::Brownian { sigma2, drift, kappa } => {
                Some(LevyTriple { kappa, a: drift, sigma2, jumps: JumpMeasure::default() })
            }
            Family::Stable { alpha, kappa, c } => {
                let cst = 1.0 / gamma(-alpha);
                // a = αc^{α−1} + C ∫_1^∞ e^{−cy} y^{−α} dy
                let big = if c == 0.0 {
                    cst / (alpha - 1.0)
                } else {
                    cst * quad::integrate_to_inf(|y| (-c * y).exp() * y.powf(-alpha), 1.0, Tol::abs(1e-14)).ok()?.value
                };
                let a = if c == 0.0 { 0.0 } else { alpha * c.powf(alpha - 1.0) } + big;
                Some(LevyTriple {
                    kappa,
                    a,
                    sigma2: 0.0,
                    jumps: JumpMeasure::single(JumpComponent::Power { c: cst, alpha, rate: c }),
                })
            }
            Family::StableSub { alpha } => {
                let cst = alpha / gamma(1.0 - alpha);
                Some(LevyTriple {
                    kappa: 0.0,
                    a: -alpha / gamma(2.0 - alpha),
                    sigma2: 0.0,
                    jumps: JumpMeasure::single(JumpComponent::Power { c: cst, alpha, rate: 0.0 }),
                })
            }
            Family::PoissonSub { q } => Some(LevyTriple {
                kappa: 0.0,
                a: 0.0,
                sigma2: 0.0,
                jumps: JumpMeasure::single(JumpComponent::Atom { at: -1.0, mass: -q.ln() }),
            }),
            Family::QPoissonSub { q } => {
                let l = -q.ln();
                Some(LevyTriple {
                    kappa: 0.0,
                    a: if l < 1.0 { -l } else { 0.0 },
                    sigma2: 0.0,
                    jumps: JumpMeasure::single(JumpComponent::Atom { at: -l, mass: 1.0 }),
                })
            }
            Family::CpExpSub { c, b, kappa } => {
                let w = c * b;
                let int_x = -1.0 / (b * b) + (-b).exp() * (1.0 / b + 1.0 / (b * b));
                Some(LevyTriple {
                    kappa,
                    a: w * int_x,
                    sigma2: 0.0,
                    jumps: JumpMeasure::single(JumpComponent::Exp { weight: w, rate: b }),
                })
            }
            _ => None,
        }
    }
}

// ====================================================================== jump measures

/// One weighted piece of a jump measure on (−∞, 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpComponent {
    /// c·e^{rate·x}|x|^{−1−α}
    Power {
        c: f64,
        alpha: f64,
        #[serde(default = "zero")]
        rate: f64,
    },
    /// weight·e^{rate·x}
    Exp { weight: f64, rate: f64 },
    /// point mass
    Atom { at: f64, mass: f64 },
    /// piecewise-linear density through (x_i, density_i), zero outside
    Table { x: Vec<f64>, density: Vec<f64> },
    /// e^{βx}Π(dx)
    Tilt { beta: f64, base: JumpMeasure },
    /// δ·e^{βx}·Π̄(−x)dx with Π̄(y) = Π(−∞, −y)
    TiltedTail { delta: f64, beta: f64, base: JumpMeasure },
}

/// Jump measure Π on (−∞, 0) as a sum of components.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JumpMeasure {
    pub components: Vec<JumpComponent>,
}

impl JumpMeasure {
    pub fn single(c: JumpComponent) -> Self {
        Self { components: vec![c] }
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.components {
            match c {
                JumpComponent::Power { c, alpha, rate } => {
                    if *c < 0.0 || !(*alpha < 2.0) || *rate < 0.0 {
                        return Err(Error::Validation("power component needs c >= 0, alpha < 2, rate >= 0".into()));
                    }
                    if *alpha <= 0.0 && *rate == 0.0 {
                        return Err(Error::Validation("power component with alpha <= 0 needs rate > 0".into()));
                    }
                }
                JumpComponent::Exp { weight, rate } => {
                    if *weight < 0.0 || *rate <= 0.0 {
                        return Err(Error::Validation("exp component needs weight >= 0, rate > 0".into()));
                    }
                }
                JumpComponent::Atom { at, mass } => {
                    if *at >= 0.0 || *mass < 0.0 {
                        return Err(Error::Validation("atom must sit on (-inf,0) with mass >= 0".into()));
                    }
                }
                JumpComponent::Table { x, density } => {
                    if x.len() != density.len() || x.len() < 2 {
                        return Err(Error::Validation("table needs matching x/density of length >= 2".into()));
                    }
                    if x.windows(2).any(|w| w[0] >= w[1]) || x[x.len() - 1] > 0.0 {
                        return Err(Error::Validation("table x must be increasing and <= 0".into()));
                    }
                    if density.iter().any(|d| *d < 0.0) {
                        return Err(Error::Validation("table densities must be >= 0".into()));
                    }
                    if x[x.len() - 1] == 0.0 && density[density.len() - 1] > 0.0 {
                        return Err(Error::Validation("table density must vanish at 0".into()));
                    }
                }
                JumpComponent::Tilt { beta, base } => {
                    if *beta < 0.0 {
                        return Err(Error::Validation("tilt needs beta >= 0".into()));
                    }
                    base.validate()?;
                }
                JumpComponent::TiltedTail { delta, beta, base } => {
                    if *delta < 0.0 || *beta < 0.0 {
                        return Err(Error::Validation("tilted tail needs delta, beta >= 0".into()));
                    }
                    base.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Density of the absolutely continuous part at x < 0.
    pub fn density(&self, x: f64) -> f64 {
        if x >= 0.0 {
            return 0.0;
        }
        self.components.iter().map(|c| component_density(c, x)).sum()
    }

    /// Point masses (location, mass).
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for c in &self.components {
            match c {
                JumpComponent::Atom { at, mass } => out.push((*at, *mass)),
                JumpComponent::Tilt { beta, base } => {
                    out.extend(base.atoms().into_iter().map(|(a, m)| (a, m * (beta * a).exp())))
                }
                _ => {}
            }
        }
        out
    }

    /// Tail Π̄(y) = Π(−∞, −y), y > 0.
    pub fn tail(&self, y: f64) -> f64 {
        self.components.iter().map(|c| component_tail(c, y)).sum()
    }

    /// ∫ (e^{ux} − 1 − ux·1_{|x|<1}) Π(dx) for real u ≥ 0.
    pub fn lk_integral(&self, u: f64, tol: f64) -> Result<f64> {
        let mut total = 0.0;
        for (at, m) in self.atoms() {
            let comp = if at.abs() < 1.0 { u * at } else { 0.0 };
            total += m * ((u * at).exp_m1() - comp);
        }
        if self.has_density() {
            total += self.density_lk(|x| small_jump_kernel(u * x), |x| (u * x).exp_m1(), tol)?;
        }
        Ok(total)
    }

    /// d/du of the Lévy–Khintchine integral.
    pub fn lk_integral_deriv(&self, u: f64, tol: f64) -> Result<f64> {
        let mut total = 0.0;
        for (at, m) in self.atoms() {
            let comp = if at.abs() < 1.0 { at } else { 0.0 };
            total += m * (at * (u * at).exp() - comp);
        }
        if self.has_density() {
            total += self.density_lk(|x| x * (u * x).exp_m1(), |x| x * (u * x).exp(), tol)?;
        }
        Ok(total)
    }

    /// Complex Lévy–Khintchine integral.
    pub fn lk_integral_c(&self, z: Complex64, tol: f64) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for (at, m) in self.atoms() {
            let comp = if at.abs() < 1.0 { z * at } else { Complex64::new(0.0, 0.0) };
            total += m * ((z * at).exp() - 1.0 - comp);
        }
        if self.has_density() {
            let re = self.density_lk(|x| small_jump_kernel_c(z * x).re, |x| ((z * x).exp() - 1.0).re, tol)?;
            let im = self.density_lk(|x| small_jump_kernel_c(z * x).im, |x| ((z * x).exp() - 1.0).im, tol)?;
            total += Complex64::new(re, im);
        }
        Ok(total)
    }

    fn has_density(&self) -> bool {
        self.components.iter().any(|c| match c {
            JumpComponent::Atom { .. } => false,
            JumpComponent::Tilt { base, .. } => base.has_density(),
            _ => true,
        })
    }

    /// ∫_{(−1,0)} k_small(x)ρ(x)dx + ∫_{(−∞,−1)} k_big(x)ρ(x)dx.
    fn density_lk(&self, k_small: impl Fn(f64) -> f64, k_big: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let t = Tol::abs(0.5 * tol);
        // x = −s⁴ smooths power-law singularities at 0
        let small = quad::integrate(
            |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                let x = -s.powi(4);
                k_small(x) * self.density(x) * 4.0 * s.powi(3)
            },
            0.0,
            1.0,
            t,
        )?;
        // x = −t^{−2} maps (0,1] onto (−∞,−1]
        let big = quad::integrate(
            |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                let x = -1.0 / (s * s);
                let v = k_big(x) * self.density(x) * 2.0 / (s * s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            t,
        )?;
        if !(small.converged && big.converged) {
            return Err(Error::Numerical(format!(
                "Levy-Khintchine quadrature did not reach tolerance (err {:.3e})",
                small.err + big.err
            )));
        }
        Ok(small.value + big.value)
    }

    /// ∫_{(−η,0)} x² Π(dx).
    pub fn small_jump_variance(&self, eta: f64) -> Result<f64> {
        let mut v: f64 = self.atoms().iter().filter(|(a, _)| a.abs() < eta).map(|(a, m)| m * a * a).sum();
        if self.has_density() {
            v += quad::integrate_left_singular(|y| y * y * self.density(-y), 0.0, eta, 4.0, Tol::abs(1e-13))?.value;
        }
        Ok(v)
    }

    /// ∫_{(−1,−η]} x Π(dx), the compensator mass of jumps between η and 1.
    pub fn mid_jump_mean(&self, eta: f64) -> Result<f64> {
        let mut v: f64 = self.atoms().iter().filter(|(a, _)| a.abs() < 1.0 && a.abs() >= eta).map(|(a, m)| m * a).sum();
        if self.has_density() && eta < 1.0 {
            v -= quad::integrate(|y| y * self.density(-y), eta, 1.0, Tol::abs(1e-13))?.value;
        }
        Ok(v)
    }
}

fn small_jump_kernel(y: f64) -> f64 {
    // e^y − 1 − y without cancellation for small y
    if y.abs() < 1e-3 {
        y * y * (0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y / 120.0)))
    } else {
        y.exp_m1() - y
    }
}

fn small_jump_kernel_c(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        w * w * (0.5 + w * (1.0 / 6.0 + w * (1.0 / 24.0 + w / 120.0)))
    } else {
        w.exp() - 1.0 - w
    }
}

fn component_density(c: &JumpComponent, x: f64) -> f64 {
    match c {
        JumpComponent::Power { c, alpha, rate } => c * (rate * x).exp() * (-x).powf(-1.0 - alpha),
        JumpComponent::Exp { weight, rate } => weight * (rate * x).exp(),
        JumpComponent::Atom { .. } => 0.0,
        JumpComponent::Table { x: xs, density } => {
            if x < xs[0] || x > xs[xs.len() - 1] {
                return 0.0;
            }
            let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
            let (x0, x1) = (xs[i - 1], xs[i]);
            let w = (x - x0) / (x1 - x0);
            density[i - 1] * (1.0 - w) + density[i] * w
        }
        JumpComponent::Tilt { beta, base } => (beta * x).exp() * base.density(x),
        JumpComponent::TiltedTail { delta, beta, base } => delta * (beta * x).exp() * base.tail(-x),
    }
}

fn component_tail(c: &JumpComponent, y: f64) -> f64 {
    match c {
        JumpComponent::Power { c, alpha, rate } if *rate == 0.0 && *alpha > 0.0 => c * y.powf(-alpha) / alpha,
        JumpComponent::Exp { weight, rate } => weight * (-rate * y).exp() / rate,
        JumpComponent::Atom { at, mass } => {
            if *at < -y {
                *mass
            } else {
                0.0
            }
        }
        JumpComponent::Table { x, .. } => {
            let lo = x[0];
            let hi = (-y).min(x[x.len() - 1]);
            if hi <= lo {
                return 0.0;
            }
            quad::integrate(|s| component_density(c, s), lo, hi, Tol::abs(1e-14)).map(|r| r.value).unwrap_or(f64::NAN)
        }
        JumpComponent::Tilt { beta, base } => {
            let atoms: f64 = base.atoms().iter().filter(|(a, _)| *a < -y).map(|(a, m)| m * (beta * a).exp()).sum();
            let dens = quad::integrate_to_inf(|s| component_density(c, -s), y, Tol::abs(1e-14))
                .map(|r| r.value)
                .unwrap_or(f64::NAN);
            atoms + dens
        }
        _ => quad::integrate_to_inf(|s| component_density(c, -s), y, Tol::abs(1e-14)).map(|r| r.value).unwrap_or(f64::NAN),
    }
}

// ====================================================================== triples

/// Lévy–Khintchine triple (κ, a, σ², Π).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyTriple {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub sigma2: f64,
    #[serde(default)]
    pub jumps: JumpMeasure,
}

impl LevyTriple {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::Validation(format!("triple: kappa must be >= 0, got {}", self.kappa)));
        }
        if !(self.sigma2 >= 0.0) || !self.sigma2.is_finite() {
            return Err(Error::Validation(format!("triple: sigma2 must be >= 0, got {}", self.sigma2)));
        }
        if !self.a.is_finite() {
            return Err(Error::Validation("triple: a must be finite".into()));
        }
        self.jumps.validate()?;
        // ∫(1 ∧ x²)Π(dx) < ∞
        let m = self.jumps.small_jump_variance(1.0)? + self.jumps.tail(1.0) + {
            self.jumps.atoms().iter().filter(|(a, _)| *a == -1.0).map(|(_, m)| m).sum::<f64>()
        };
        if !m.is_finite() {
            return Err(Error::Validation("triple: jump measure is not a Levy measure".into()));
        }
        Ok(())
    }
}

/// ψ(u) from a triple by quadrature, absolute tolerance `tol`.
pub fn eval_lk_triple(t: &LevyTriple, u: f64, tol: f64) -> Result<f64> {
    if u < 0.0 {
        return Err(Error::Domain(format!("eval_lk_triple needs u >= 0, got {u}")));
    }
    if tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    Ok(-t.kappa + t.a * u + 0.5 * t.sigma2 * u * u + t.jumps.lk_integral(u, tol)?)
}

// ====================================================================== exponent tree

pub(crate) type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub(crate) enum Node {
    Family(Family),
    Triple(LevyTriple),
    /// ψ(u+β) − ψ(β)
    Esscher { base: LaplaceExponent, beta: f64, psi_beta: f64 },
    /// T_{δ,β}ψ
    T { base: LaplaceExponent, delta: f64, beta: f64, psi_beta: f64 },
    /// T^γ_{δ,β}ψ in the closed form of the composed map
    Composed { base: LaplaceExponent, gamma: f64, delta: f64, beta: f64, psi_beta: f64 },
    /// ψ(u+θ) with no recentring
    Shift { base: LaplaceExponent, theta: f64 },
    /// u/(u−θ)·ψ(u), the formal T_{−θ} applied to ψ_θ
    NegTheta { base: LaplaceExponent, theta: f64 },
    Custom { name: String, f: RealFn, floor: f64, subordinator: bool },
}

/// A Laplace exponent. Cheap to clone; immutable.
#[derive(Clone)]
pub struct LaplaceExponent(pub(crate) Arc<Node>);

impl fmt::Debug for LaplaceExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

impl From<Family> for LaplaceExponent {
    fn from(f: Family) -> Self {
        LaplaceExponent(Arc::new(Node::Family(f)))
    }
}

impl LaplaceExponent {
    pub fn family(f: Family) -> Result<Self> {
        f.validate()?;
        Ok(f.into())
    }

    pub fn triple(t: LevyTriple) -> Result<Self> {
        t.validate()?;
        Ok(LaplaceExponent(Arc::new(Node::Triple(t))))
    }

    /// Wrap an arbitrary function; `f` is in the native convention.
    pub fn custom(name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static, floor: f64, subordinator: bool) -> Self {
        LaplaceExponent(Arc::new(Node::Custom { name: name.into(), f: Arc::new(f), floor, subordinator }))
    }

    pub(crate) fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn wrap(n: Node) -> Self {
        LaplaceExponent(Arc::new(n))
    }

    pub fn as_family(&self) -> Option<&Family> {
        match self.node() {
            Node::Family(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_triple(&self) -> Option<&LevyTriple> {
        match self.node() {
            Node::Triple(t) => Some(t),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self.node() {
            Node::Family(f) => format!("{f:?}"),
            Node::Triple(_) => "triple".into(),
            Node::Esscher { base, beta, .. } => format!("E_{beta}[{}]", base.describe()),
            Node::T { base, delta, beta, .. } => format!("T_{{{delta},{beta}}}[{}]", base.describe()),
            Node::Composed { base, gamma, delta, beta, .. } => {
                format!("T^{gamma}_{{{delta},{beta}}}[{}]", base.describe())
            }
            Node::Shift { base, theta } => format!("shift_{theta}[{}]", base.describe()),
            Node::NegTheta { base, theta } => format!("T_-{theta}shift[{}]", base.describe()),
            Node::Custom { name, .. } => name.clone(),
        }
    }

    /// True for subordinator exponents, where `eval` returns φ = −ψ.
    pub fn is_subordinator(&self) -> bool {
        match self.node() {
            Node::Family(f) => f.is_subordinator(),
            Node::Triple(_) => false,
            Node::Esscher { base, .. }
            | Node::T { base, .. }
            | Node::Composed { base, .. }
            | Node::Shift { base, .. }
            | Node::NegTheta { base, .. } => base.is_subordinator(),
            Node::Custom { subordinator, .. } => *subordinator,
        }
    }

    fn sign(&self) -> f64 {
        if self.is_subordinator() {
            -1.0
        } else {
            1.0
        }
    }

    /// Domain floor ℓ: the exponent is defined on (ℓ, ∞).
    pub fn floor(&self) -> f64 {
        match self.node() {
            Node::Family(f) => f.floor(),
            Node::Triple(_) => 0.0,
            Node::Esscher { base, beta, .. } | Node::T { base, beta, .. } => base.floor() - beta,
            Node::Composed { base, gamma, beta, .. } => base.floor() - beta - gamma,
            Node::Shift { base, theta } => base.floor() - theta,
            Node::NegTheta { base, .. } => base.floor(),
            Node::Custom { floor, .. } => *floor,
        }
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        let l = self.floor();
        let ok = if l == 0.0 { u >= 0.0 } else { u > l };
        if ok && !u.is_nan() {
            Ok(())
        } else {
            Err(Error::Domain(format!("u = {u} outside the domain (floor {l})")))
        }
    }

    /// Value in the native convention: ψ(u), or φ(u) for subordinators.
    pub fn eval(&self, u: f64) -> Result<f64> {
        Ok(self.sign() * self.psi(u)?)
    }

    /// Derivative in the native convention.
    pub fn eval_deriv(&self, u: f64) -> Result<f64> {
        Ok(self.sign() * self.dpsi(u)?)
    }

    /// ψ(u) in the spectrally negative convention (−φ for subordinators).
    pub fn psi(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        let v = self.psi_unchecked(u)?;
        if v.is_nan() {
            return Err(Error::Numerical(format!("exponent evaluated to NaN at u = {u}")));
        }
        Ok(v)
    }

    fn psi_unchecked(&self, u: f64) -> Result<f64> {
        match self.node() {
            Node::Family(f) => f.psi(u),
            Node::Triple(t) => Ok(-t.kappa + t.a * u + 0.5 * t.sigma2 * u * u + t.jumps.lk_integral(u, LK_TOL)?),
            Node::Esscher { base, beta, psi_beta } => Ok(base.psi(u + beta)? - psi_beta),
            Node::T { base, delta, beta, psi_beta } => {
                if *beta == 0.0 {
                    if u == 0.0 {
                        return Ok(0.0);
                    }
                    let p = base.psi(u)?;
                    return Ok(p - delta * p / u);
                }
                let v = u + beta;
                Ok((v - delta) / v * base.psi(v)? - (beta - delta) / beta * psi_beta)
            }
            Node::Composed { base, gamma, delta, beta, psi_beta } => {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let v = u + gamma + beta;
                let inner = (v - delta) / v * base.psi(v)?
                    - if *beta == 0.0 { 0.0 } else { (beta - delta) / beta * psi_beta };
                Ok(u / (u + gamma) * inner)
            }
            Node::Shift { base, theta } => base.psi(u + theta),
            Node::NegTheta { base, theta } => {
                let d = u - theta;
                if d.abs() < 1e-7 {
                    // removable singularity: value θψ'(θ) + O(u−θ)
                    return Ok(u * base.dpsi(*theta)?);
                }
                Ok(u / d * base.psi(u)?)
            }
            Node::Custom { f, subordinator, .. } => Ok(if *subordinator { -f(u) } else { f(u) }),
        }
    }

    /// ψ'(u), analytic through the wrapper tree where possible.
    pub fn dpsi(&self, u: f64) -> Result<f64> {
        self.check_domain(u)?;
        match self.node() {
            Node::Family(f) => f.dpsi(u),
            Node::Triple(t) => Ok(t.a + t.sigma2 * u + t.jumps.lk_integral_deriv(u, LK_TOL)?),
            Node::Esscher { base, beta, .. } => base.dpsi(u + beta),
            Node::T { base, delta, beta, .. } => {
                let v = u + beta;
                if v == 0.0 {
                    return self.numeric_dpsi(u);
                }
                Ok(delta / (v * v) * base.psi(v)? + (v - delta) / v * base.dpsi(v)?)
            }
            Node::Composed { base, gamma, delta, beta, psi_beta } => {
                let v = u + gamma + beta;
                let inner = (v - delta) / v * base.psi(v)?
                    - if *beta == 0.0 { 0.0 } else { (beta - delta) / beta * psi_beta };
                let dinner = delta / (v * v) * base.psi(v)? + (v - delta) / v * base.dpsi(v)?;
                let w = u + gamma;
                Ok(gamma / (w * w) * inner + u / w * dinner)
            }
            Node::Shift { base, theta } => base.dpsi(u + theta),
            Node::NegTheta { base, theta } => {
                let d = u - theta;
                if d.abs() < 1e-5 {
                    return self.numeric_dpsi(u);
                }
                Ok(-theta / (d * d) * base.psi(u)? + u / d * base.dpsi(u)?)
            }
            Node::Custom { .. } => self.numeric_dpsi(u),
        }
    }

    fn numeric_dpsi(&self, u: f64) -> Result<f64> {
        let h = 1e-6_f64.max(1e-6 * u.abs());
        let f = |x: f64| self.psi_unchecked(x).unwrap_or(f64::NAN);
        let lo = self.floor();
        let d = if u - h > lo && !(lo == 0.0 && u - h < 0.0) {
            quad::richardson_derivative(f, u, h)
        } else {
            quad::richardson_forward(f, u, h)
        };
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Numerical(format!("finite difference failed at u = {u}")))
        }
    }

    /// Complex ψ(z), used by Laplace inversion.
    pub fn psi_c(&self, z: Complex64) -> Result<Complex64> {
        match self.node() {
            Node::Family(f) => Ok(f.psi_c(z)),
            Node::Triple(t) => Ok(-t.kappa + t.a * z + 0.5 * t.sigma2 * z * z + t.jumps.lk_integral_c(z, LK_TOL)?),
            Node::Esscher { base, beta, psi_beta } => Ok(base.psi_c(z + beta)? - psi_beta),
            Node::T { base, delta, beta, psi_beta } => {
                if *beta == 0.0 {
                    let p = base.psi_c(z)?;
                    return Ok(p - delta * p / z);
                }
                let v = z + beta;
                Ok((v - delta) / v * base.psi_c(v)? - (beta - delta) / beta * psi_beta)
            }
            Node::Composed { base, gamma, delta, beta, psi_beta } => {
                let v = z + gamma + beta;
                let inner = (v - delta) / v * base.psi_c(v)?
                    - if *beta == 0.0 { 0.0 } else { (beta - delta) / beta * psi_beta };
                Ok(z / (z + gamma) * inner)
            }
            Node::Shift { base, theta } => base.psi_c(z + theta),
            Node::NegTheta { base, theta } => Ok(z / (z - theta) * base.psi_c(z)?),
            Node::Custom { name, .. } => Err(Error::Unavailable(format!("no complex extension for custom exponent {name}"))),
        }
    }

    /// Killing rate κ = −ψ(0) (φ(0) for subordinators).
    pub fn kappa(&self) -> f64 {
        match self.node() {
            Node::Triple(t) => t.kappa,
            Node::Family(Family::Brownian { kappa, .. } | Family::Stable { kappa, .. } | Family::CpExpSub { kappa, .. }) => {
                *kappa
            }
            Node::Esscher { .. } | Node::T { .. } | Node::Composed { .. } => 0.0,
            _ => {
                if self.check_domain(0.0).is_err() {
                    return f64::NAN;
                }
                -self.psi_unchecked(0.0).unwrap_or(f64::NAN)
            }
        }
    }

    /// Closed-form Cramér root when available.
    pub fn theta_known(&self) -> Option<f64> {
        match self.node() {
            Node::Family(f) if !f.is_subordinator() => f.theta(),
            Node::Shift { base, theta } => base.theta_known().map(|t| (t - theta).max(0.0)),
            _ => None,
        }
    }

    /// Cramér root, closed form if known else bisection.
    pub fn theta(&self) -> Result<f64> {
        match self.theta_known() {
            Some(t) => Ok(t),
            None => cramer_root(self, 1e-13),
        }
    }

    /// Whether the process has paths of unbounded variation, if known.
    pub fn unbounded_variation(&self) -> Option<bool> {
        match self.node() {
            Node::Family(f) => Some(f.unbounded_variation()),
            Node::Triple(t) => {
                if t.sigma2 > 0.0 {
                    return Some(true);
                }
                let m = quad::integrate_left_singular(|y| y * t.jumps.density(-y), 0.0, 1.0, 4.0, Tol::abs(1e-10)).ok()?;
                Some(!m.converged || !m.value.is_finite() || m.value > 1e8)
            }
            Node::Esscher { base, .. }
            | Node::T { base, .. }
            | Node::Composed { base, .. }
            | Node::Shift { base, .. }
            | Node::NegTheta { base, .. } => base.unbounded_variation(),
            Node::Custom { .. } => None,
        }
    }

    /// Lévy–Khintchine triple if one is known for this exponent.
    pub fn to_triple(&self) -> Option<LevyTriple> {
        match self.node() {
            Node::Family(f) => f.to_triple(),
            Node::Triple(t) => Some(t.clone()),
            _ => None,
        }
    }
}

// ====================================================================== operations

/// eval(ψ, u): native-convention value.
pub fn eval(psi: &LaplaceExponent, u: f64) -> Result<f64> {
    psi.eval(u)
}

/// ψ'(0+) and whether the exponent is killed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftAtZero {
    pub value: f64,
    pub killed: bool,
}

/// Right derivative at 0 (native convention). Analytic where the
/// exponent tree allows it, otherwise Richardson finite differences with step h.
pub fn drift_at_zero(psi: &LaplaceExponent, h: f64) -> DriftAtZero {
    let killed = psi.kappa().abs() > 0.0;
    let analytic = match psi.node() {
        Node::Custom { .. } => None,
        Node::T { beta, .. } if *beta == 0.0 => None,
        _ => psi.eval_deriv(0.0).ok(),
    };
    let value = match analytic {
        Some(v) => v,
        None => {
            let f = |x: f64| psi.eval(x).unwrap_or(f64::NAN);
            quad::richardson_forward(f, 0.0, h)
        }
    };
    DriftAtZero { value, killed }
}

/// θ = sup{λ ≥ 0 : ψ(λ) = 0} by bracket doubling and bisection.
pub fn cramer_root(psi: &LaplaceExponent, tol: f64) -> Result<f64> {
    let f = |u: f64| psi.psi(u);
    let p0 = f(0.0)?;
    if p0 == 0.0 {
        let d = drift_at_zero(psi, 1e-6).value * psi.sign();
        if d >= 0.0 {
            return Ok(0.0);
        }
    } else if p0 > 0.0 {
        return Err(Error::Validation("psi(0) > 0 is not a Laplace exponent".into()));
    }
    let mut hi = 1.0;
    while f(hi)? <= 0.0 {
        hi *= 2.0;
        if hi > 2f64.powi(60) {
            return Err(Error::Numerical("no finite bracket for the Cramer root".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Φ(u) = ψ(u)/u.
#[derive(Clone, Debug)]
pub struct LadderExponent {
    pub base: LaplaceExponent,
    /// Φ(0+) = ψ'(0+)
    pub at_zero: f64,
}

impl LadderExponent {
    pub fn eval(&self, u: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(self.at_zero);
        }
        Ok(self.base.eval(u)? / u)
    }
}

pub fn ladder(psi: &LaplaceExponent) -> Result<LadderExponent> {
    let p0 = psi.eval(0.0)?;
    if p0.abs() > 1e-14 {
        return Err(Error::Validation(format!("ladder exponent needs psi(0) = 0, got {p0}")));
    }
    let d = drift_at_zero(psi, 1e-6).value;
    if !d.is_finite() {
        return Err(Error::Validation("ladder exponent needs a finite psi'(0+)".into()));
    }
    Ok(LadderExponent { base: psi.clone(), at_zero: d })
}

/// One validation check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Grid checks: convexity of ψ, ψ(0) = −κ, and for subordinators φ
/// non-decreasing and concave.
pub fn validate(psi: &LaplaceExponent, grid: &[f64]) -> Result<ValidationReport> {
    let mut g: Vec<f64> = grid.to_vec();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup();
    let vals: Vec<f64> = g.iter().map(|&u| psi.psi(u)).collect::<Result<_>>()?;
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for i in 1..g.len().saturating_sub(1) {
        let (u1, u2, u3) = (g[i - 1], g[i], g[i + 1]);
        let w = (u2 - u1) / (u3 - u1);
        let interp = vals[i - 1] * (1.0 - w) + vals[i + 1] * w;
        worst = worst.max(vals[i] - interp);
    }
    checks.push(Check {
        name: "convexity".into(),
        pass: worst <= tol,
        detail: format!("max excess over chord {worst:.3e}"),
    });

    if let Some(i) = g.iter().position(|&u| u == 0.0) {
        let k = psi.kappa();
        let tol0 = if psi.as_triple().is_some() { 1e-9 } else { 1e-14 };
        let err = (vals[i] + k).abs();
        checks.push(Check { name: "psi(0) = -kappa".into(), pass: err <= tol0, detail: format!("residual {err:.3e}") });
    }

    if psi.is_subordinator() {
        let phi: Vec<f64> = vals.iter().map(|v| -v).collect();
        let mono = phi.windows(2).all(|w| w[1] >= w[0] - tol);
        checks.push(Check { name: "phi non-decreasing".into(), pass: mono, detail: String::new() });
        checks.push(Check { name: "phi concave".into(), pass: worst <= tol, detail: String::new() });
    }
    Ok(ValidationReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fam(f: Family) -> LaplaceExponent {
        LaplaceExponent::family(f).unwrap()
    }

    fn bm(sigma2: f64, drift: f64, kappa: f64) -> LaplaceExponent {
        fam(Family::Brownian { sigma2, drift, kappa })
    }

    #[test]
    fn eval_examples() {
        assert_eq!(bm(1.0, 0.0, 0.0).eval(2.0).unwrap(), 2.0);
        assert_eq!(fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 }).eval(4.0).unwrap(), 8.0);
        let cp = fam(Family::CpExpSub { c: 1.0, b: 1.0, kappa: 0.0 });
        assert_eq!(cp.eval(1.0).unwrap(), 0.5);
        assert!(fam(Family::StableSub { alpha: 0.5 }).eval(-1.0).is_err());
    }

    #[test]
    fn triple_examples() {
        let t = LevyTriple { kappa: 0.0, a: 1.0, sigma2: 0.0, jumps: JumpMeasure::default() };
        assert_eq!(eval_lk_triple(&t, 3.0, 1e-10).unwrap(), 3.0);
        let t = LevyTriple { kappa: 2.0, a: 0.0, sigma2: 0.0, jumps: JumpMeasure::default() };
        assert_eq!(eval_lk_triple(&t, 0.0, 1e-10).unwrap(), -2.0);
        let st = Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 }.to_triple().unwrap();
        assert!((eval_lk_triple(&st, 1.0, 1e-10).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_forms_match_their_triples() {
        let fams = [
            Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 },
            Family::Stable { alpha: 1.3, kappa: 0.2, c: 0.7 },
            Family::CpExpSub { c: 1.0, b: 1.0, kappa: 1.0 },
            Family::CpExpSub { c: 0.5, b: 2.5, kappa: 0.0 },
            Family::PoissonSub { q: 0.5 },
            Family::QPoissonSub { q: 0.3 },
            Family::StableSub { alpha: 0.5 },
            Family::StableSub { alpha: 0.8 },
            Family::Brownian { sigma2: 2.0, drift: -1.0, kappa: 0.3 },
        ];
        let tol = 1e-10;
        for f in fams {
            let t = f.to_triple().unwrap();
            let e: LaplaceExponent = f.clone().into();
            for &u in &[0.5, 1.0, 2.0, 5.0] {
                let a = e.psi(u).unwrap();
                let b = eval_lk_triple(&t, u, tol).unwrap();
                assert!((a - b).abs() <= 10.0 * tol, "{f:?} u={u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn triple_derivative_and_complex_extension() {
        let f = Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.5 };
        let e: LaplaceExponent = f.clone().into();
        let t = LaplaceExponent::triple(f.to_triple().unwrap()).unwrap();
        for &u in &[0.3, 1.0, 3.0] {
            assert!((t.dpsi(u).unwrap() - e.dpsi(u).unwrap()).abs() < 1e-8);
        }
        let z = Complex64::new(1.5, 2.0);
        assert!((t.psi_c(z).unwrap() - e.psi_c(z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn drift_examples() {
        assert_eq!(drift_at_zero(&bm(1.0, 0.5, 0.0), 1e-6).value, 0.5);
        let s0 = fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 });
        assert_eq!(drift_at_zero(&s0, 1e-6).value, 0.0);
        let s1 = fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 1.0 });
        assert!((drift_at_zero(&s1, 1e-6).value - 1.5).abs() < 1e-15);
        let k = drift_at_zero(&bm(1.0, 0.0, 1.0), 1e-6);
        assert!(k.killed);
        // finite-difference fallback
        let c = LaplaceExponent::custom("cubic", |u| u * u * u + 0.25 * u, 0.0, false);
        assert!((drift_at_zero(&c, 1e-6).value - 0.25).abs() < 1e-9);
    }

    #[test]
    fn cramer_examples() {
        assert!((cramer_root(&bm(2.0, -1.0, 0.0), 1e-12).unwrap() - 1.0).abs() < 1e-12);
        let p = fam(Family::PochhammerSn { alpha: 1.5 });
        let th = cramer_root(&p, 1e-12).unwrap();
        assert!((th - 1.0).abs() < 1e-11, "{th}");
        assert_eq!(cramer_root(&bm(1.0, 1.0, 0.0), 1e-12).unwrap(), 0.0);
        // killed stable: closed form (κ)^{1/α}
        let ks = fam(Family::Stable { alpha: 1.5, kappa: 2.0, c: 0.0 });
        assert!((cramer_root(&ks, 1e-12).unwrap() - ks.theta_known().unwrap()).abs() < 1e-11);
        let m = fam(Family::MittagLefflerSn { alpha: 1.5 });
        assert!((cramer_root(&m, 1e-12).unwrap() - 2.0 / 3.0).abs() < 1e-11);
        assert!(cramer_root(&fam(Family::StableSub { alpha: 0.5 }), 1e-12).is_err());
    }

    #[test]
    fn ladder_examples() {
        let l = ladder(&bm(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(l.eval(3.0).unwrap(), 3.0);
        let l = ladder(&fam(Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 })).unwrap();
        assert!((l.eval(4.0).unwrap() - 2.0).abs() < 1e-15);
        // (1)_{1.5}/2 = Γ(2.5)/2
        let p = fam(Family::PochhammerSn { alpha: 1.5 });
        let l = ladder(&p).unwrap();
        let oracle = 0.75 * PI.sqrt() / 2.0;
        assert!((l.eval(2.0).unwrap() - oracle).abs() < 1e-14);
        assert!((oracle - 0.664_670).abs() < 1e-6);
        assert!(ladder(&bm(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&bm(1.0, 0.0, 0.0), &[0.0, 1.0, 2.0, 3.0]).unwrap().all_pass());
        let s = LaplaceExponent::custom("sin", f64::sin, f64::NEG_INFINITY, false);
        let r = validate(&s, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(!r.checks.iter().find(|c| c.name == "convexity").unwrap().pass);
        assert!(validate(&fam(Family::StableSub { alpha: 0.5 }), &[0.0, 1.0, 2.0]).unwrap().all_pass());
    }

    #[test]
    fn killing_values() {
        // Lamperti-stable: ψ(0) = 1/Γ(1−α) < 0
        let l = fam(Family::LampertiStableSn { alpha: 1.5 });
        assert!((l.kappa() + 1.0 / gamma(-0.5)).abs() < 1e-14);
        assert_eq!(fam(Family::PochhammerSn { alpha: 1.5 }).kappa(), 0.0);
    }

    #[test]
    fn family_json_round_trip() {
        let f = Family::Brownian { sigma2: 1.0, drift: 0.0, kappa: 0.0 };
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<Family>(&s).unwrap(), f);
        let bad: Family = serde_json::from_str(r#"{"family":"stable","params":{"alpha":2.5}}"#).unwrap();
        assert!(bad.validate().is_err());
    }
}
