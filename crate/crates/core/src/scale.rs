//! Scale functions: closed forms, the transformation formulas for T_β and
//! T_{δ,θ}, and fixed-Talbot inversion of 1/ψ.

use crate::error::{Error, Result};
use crate::exponent::{self, Family, LaplaceExponent, Node};
use crate::quad::{self, Tol};
use crate::specfun::{self, gamma, IncGammaReading};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default number of Talbot nodes.
pub const TALBOT_NODES: usize = 32;

/// Fixed-Talbot inversion of F at t > 0 with `m` nodes.
pub fn talbot(f: impl Fn(Complex64) -> Result<Complex64>, t: f64, m: usize) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Talbot inversion needs t > 0, got {t}")));
    }
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut sum = 0.5 * f(Complex64::new(r, 0.0))?.re * (r * t).exp();
    for k in 1..m {
        let th = k as f64 * PI / m as f64;
        let cot = 1.0 / th.tan();
        let s = Complex64::new(r * th * cot, r * th);
        let sigma = th + (th * cot - 1.0) * cot;
        let term = (s * t).exp() * f(s)? * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    let v = r / m as f64 * sum;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("Talbot inversion produced {v} at t = {t}")))
    }
}

/// Which reading of the printed closed forms to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Forms re-derived from the Laplace identity 1/ψ.
    #[default]
    Derived,
    /// Forms exactly as printed, kept for the discrepancy report.
    Verbatim,
}

/// Closed-form scale functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedForm {
    /// σ²u²/2 + drift·u − κ
    Brownian { sigma2: f64, drift: f64, kappa: f64 },
    /// (u+c)^α − c^α − κ
    Stable { alpha: f64, kappa: f64, c: f64 },
    /// T_{δ,0} applied to u^α − κ
    StableDelta0 { alpha: f64, delta: f64, kappa: f64 },
    /// T^β_{δ,0} applied to u^α − κ
    StableBetaDelta0 { alpha: f64, delta: f64, beta: f64, kappa: f64 },
    /// (u−1)_α
    Pochhammer { alpha: f64 },
    /// T_{δ,1} applied to (u−1)_α
    PochhammerDelta1 { alpha: f64, delta: f64 },
    /// T^β_{δ,1} applied to (u−1)_α
    PochhammerBetaDelta1 { alpha: f64, delta: f64, beta: f64 },
}

fn alpha_range(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("alpha must be in (1,2), got {alpha}")))
    }
}

/// c^{1−α}E_{α,α−1}(cx; κc^{−α}) = ∫_0^x e^{−cy} W'_κ(y) dy.
fn a_c(alpha: f64, c: f64, kappa: f64, x: f64) -> Result<f64> {
    let s = specfun::inc_mittag_leffler(alpha, alpha - 1.0, c * x, kappa * c.powf(-alpha), IncGammaReading::Lower)?;
    Ok(c.powf(1.0 - alpha) * s.value)
}

/// W and W' of u^α − κ.
fn stable_w(alpha: f64, kappa: f64, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((0.0, f64::INFINITY));
    }
    let xa = x.powf(alpha);
    let w = x.powf(alpha - 1.0) * specfun::mittag_leffler(alpha, alpha, kappa * xa)?.value;
    let dw = x.powf(alpha - 2.0) * specfun::mittag_leffler(alpha, alpha - 1.0, kappa * xa)?.value;
    Ok((w, dw))
}

/// W' of (u−1)_α in the requested convention.
fn pochhammer_dw(alpha: f64, y: f64, conv: Convention) -> f64 {
    let g = gamma(alpha);
    let em1 = y.exp_m1();
    match conv {
        Convention::Derived => ((2.0 - alpha) * y).exp() * em1.powf(alpha - 2.0) * (y.exp() + alpha - 2.0) / g,
        Convention::Verbatim => (-alpha * y).exp() * em1.powf(alpha - 2.0) * (alpha - y.exp()) / g,
    }
}

/// ∫_0^x e^{−λy} W'(y) dy for the Pochhammer family.
fn pochhammer_int(alpha: f64, lambda: f64, x: f64, conv: Convention) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    // y^{α−2} singularity at 0
    let p = (1.0 / (alpha - 1.0)).max(2.0);
    let r = quad::integrate_left_singular(
        |y| (-lambda * y).exp() * pochhammer_dw(alpha, y, conv),
        0.0,
        x,
        p,
        Tol::both(1e-14, 1e-13),
    )?;
    if !r.converged {
        return Err(Error::Numerical("Pochhammer scale integral did not converge".into()));
    }
    Ok(r.value)
}

impl ClosedForm {
    pub fn validate(&self) -> Result<()> {
        let nn = |n: &str, v: f64| -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!("{n} must be >= 0, got {v}")))
            }
        };
        match *self {
            ClosedForm::Brownian { sigma2, kappa, .. } => {
                nn("sigma2", sigma2)?;
                nn("kappa", kappa)
            }
            ClosedForm::Stable { alpha, kappa, c } => {
                alpha_range(alpha)?;
                nn("kappa", kappa)?;
                nn("c", c)
            }
            ClosedForm::StableDelta0 { alpha, delta, kappa } => {
                alpha_range(alpha)?;
                nn("delta", delta)?;
                nn("kappa", kappa)
            }
            ClosedForm::StableBetaDelta0 { alpha, delta, beta, kappa } => {
                alpha_range(alpha)?;
                nn("delta", delta)?;
                nn("kappa", kappa)?;
                nn("beta", beta)?;
                if beta == delta {
                    return Err(Error::Validation("this form needs beta != delta".into()));
                }
                Ok(())
            }
            ClosedForm::Pochhammer { alpha } => alpha_range(alpha),
            ClosedForm::PochhammerDelta1 { alpha, delta } => {
                alpha_range(alpha)?;
                nn("delta", delta)
            }
            ClosedForm::PochhammerBetaDelta1 { alpha, delta, beta } => {
                alpha_range(alpha)?;
                nn("delta", delta)?;
                nn("beta", beta)?;
                if beta + 1.0 - delta == 0.0 {
                    return Err(Error::Validation("this form needs beta + 1 != delta".into()));
                }
                Ok(())
            }
        }
    }

    /// W(x).
    pub fn eval(&self, x: f64, conv: Convention) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("scale function needs x >= 0, got {x}")));
        }
        self.validate()?;
        match *self {
            ClosedForm::Brownian { sigma2, drift, kappa } => Ok(brownian_w(sigma2, drift, kappa, x)?.0),
            ClosedForm::Stable { alpha, kappa, c } => {
                Ok((-c * x).exp() * stable_w(alpha, kappa + c.powf(alpha), x)?.0)
            }
            ClosedForm::StableDelta0 { alpha, delta, kappa } => {
                if delta == 0.0 {
                    return Ok(stable_w(alpha, kappa, x)?.0);
                }
                match conv {
                    Convention::Derived => Ok((delta * x).exp() * a_c(alpha, delta, kappa, x)?),
                    Convention::Verbatim if kappa == 0.0 => Ok(delta.powf(alpha - 1.0) / gamma(alpha - 1.0)
                        * (delta * x).exp()
                        * specfun::inc_gamma(alpha - 1.0, delta * x)?),
                    Convention::Verbatim => Ok((x / delta).powf(alpha - 1.0)
                        * specfun::inc_mittag_leffler(alpha, alpha - 1.0, x, kappa / delta, IncGammaReading::Lower)?.value),
                }
            }
            ClosedForm::StableBetaDelta0 { alpha, delta, beta, kappa } => {
                let d = beta - delta;
                match conv {
                    Convention::Derived => {
                        let first = if beta == 0.0 { 0.0 } else { beta / d * a_c(alpha, beta, kappa, x)? };
                        let second = if delta == 0.0 {
                            0.0
                        } else {
                            delta / d * (-d * x).exp() * a_c(alpha, delta, kappa, x)?
                        };
                        Ok(first - second)
                    }
                    Convention::Verbatim if kappa == 0.0 => {
                        let g = gamma(alpha - 1.0);
                        Ok((beta.powf(alpha) / d * specfun::inc_gamma(alpha - 1.0, beta * x)?
                            - (d * x).exp() * delta.powf(alpha) / d * specfun::inc_gamma(alpha - 1.0, delta * x)?)
                            / g)
                    }
                    Convention::Verbatim => {
                        let e = |c: f64| -> Result<f64> {
                            Ok((x / c).powf(alpha - 1.0)
                                * specfun::inc_mittag_leffler(alpha, alpha - 1.0, x, kappa / c, IncGammaReading::Lower)?
                                    .value)
                        };
                        Ok(beta / d * e(beta)? - delta / d * (-d * x).exp() * e(delta)?)
                    }
                }
            }
            ClosedForm::Pochhammer { alpha } => {
                let core = (-x).exp_m1().abs().powf(alpha - 1.0) / gamma(alpha);
                Ok(match conv {
                    Convention::Derived => x.exp() * core,
                    Convention::Verbatim => (-x).exp() * core,
                })
            }
            ClosedForm::PochhammerDelta1 { alpha, delta } => {
                Ok(((delta - 1.0) * x).exp() * pochhammer_int(alpha, delta, x, conv)?)
            }
            ClosedForm::PochhammerBetaDelta1 { alpha, delta, beta } => {
                let d = beta + 1.0 - delta;
                let v = beta / d * pochhammer_int(alpha, beta + 1.0, x, conv)?
                    + (1.0 - delta) / d * (-d * x).exp() * pochhammer_int(alpha, delta, x, conv)?;
                // the printed form carries no 1/Γ(α)
                Ok(match conv {
                    Convention::Derived => v,
                    Convention::Verbatim => v * gamma(alpha),
                })
            }
        }
    }

    /// W'(x) for x > 0 (derived convention).
    pub fn deriv(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain("W' is evaluated for x > 0".into()));
        }
        self.validate()?;
        let conv = Convention::Derived;
        match *self {
            ClosedForm::Brownian { sigma2, drift, kappa } => Ok(brownian_w(sigma2, drift, kappa, x)?.1),
            ClosedForm::Stable { alpha, kappa, c } => {
                let (w, dw) = stable_w(alpha, kappa + c.powf(alpha), x)?;
                Ok((-c * x).exp() * (dw - c * w))
            }
            ClosedForm::StableDelta0 { alpha, delta, kappa } => {
                Ok(delta * self.eval(x, conv)? + stable_w(alpha, kappa, x)?.1)
            }
            ClosedForm::StableBetaDelta0 { alpha, delta, beta, kappa } => {
                let g = ClosedForm::StableDelta0 { alpha, delta, kappa };
                Ok((-beta * x).exp() * g.deriv(x)?)
            }
            ClosedForm::Pochhammer { alpha } => Ok(pochhammer_dw(alpha, x, conv)),
            ClosedForm::PochhammerDelta1 { alpha, delta } => {
                Ok(-(1.0 - delta) * self.eval(x, conv)? + (-x).exp() * pochhammer_dw(alpha, x, conv))
            }
            ClosedForm::PochhammerBetaDelta1 { alpha, delta, beta } => {
                let g = ClosedForm::PochhammerDelta1 { alpha, delta };
                Ok((-beta * x).exp() * g.deriv(x)?)
            }
        }
    }

    /// Recognize exponents whose scale function has a closed form here.
    pub fn recognize(psi: &LaplaceExponent) -> Option<ClosedForm> {
        let fam = |e: &LaplaceExponent| e.as_family().cloned();
        match psi.node() {
            Node::Family(Family::Brownian { sigma2, drift, kappa }) if *sigma2 > 0.0 || *drift > 0.0 => {
                Some(ClosedForm::Brownian { sigma2: *sigma2, drift: *drift, kappa: *kappa })
            }
            Node::Family(Family::Stable { alpha, kappa, c }) => {
                Some(ClosedForm::Stable { alpha: *alpha, kappa: *kappa, c: *c })
            }
            Node::Family(Family::PochhammerSn { alpha }) => Some(ClosedForm::Pochhammer { alpha: *alpha }),
            Node::T { base, delta, beta, .. } => match (fam(base)?, *beta) {
                (Family::Stable { alpha, kappa, c }, b) if b == 0.0 && c == 0.0 => {
                    Some(ClosedForm::StableDelta0 { alpha, delta: *delta, kappa })
                }
                (Family::PochhammerSn { alpha }, b) if b == 1.0 => {
                    Some(ClosedForm::PochhammerDelta1 { alpha, delta: *delta })
                }
                _ => None,
            },
            Node::Composed { base, gamma, delta, beta, .. } => match (fam(base)?, *beta) {
                (Family::Stable { alpha, kappa, c }, b) if b == 0.0 && c == 0.0 && gamma != delta => {
                    Some(ClosedForm::StableBetaDelta0 { alpha, delta: *delta, beta: *gamma, kappa })
                }
                (Family::PochhammerSn { alpha }, b) if b == 1.0 && *gamma + 1.0 != *delta => {
                    Some(ClosedForm::PochhammerBetaDelta1 { alpha, delta: *delta, beta: *gamma })
                }
                _ => None,
            },
            _ => None,
        }
    }
}

/// W and W' for σ²u²/2 + du − κ, from the partial fractions of 1/ψ.
fn brownian_w(sigma2: f64, drift: f64, kappa: f64, x: f64) -> Result<(f64, f64)> {
    if sigma2 == 0.0 {
        if drift <= 0.0 {
            return Err(Error::Validation("pure drift needs drift > 0".into()));
        }
        let r = kappa / drift;
        return Ok(((r * x).exp() / drift, r * (r * x).exp() / drift));
    }
    let disc = (drift * drift + 2.0 * sigma2 * kappa).sqrt();
    let r1 = (-drift + disc) / sigma2;
    let r2 = (-drift - disc) / sigma2;
    let k = 2.0 / sigma2;
    if disc == 0.0 {
        let e = (r1 * x).exp();
        return Ok((k * x * e, k * e * (1.0 + r1 * x)));
    }
    let w = k * ((r1 * x).exp() - (r2 * x).exp()) / (r1 - r2);
    let dw = k * (r1 * (r1 * x).exp() - r2 * (r2 * x).exp()) / (r1 - r2);
    Ok((w, dw))
}

/// W at a point with an error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScaleValue {
    pub value: f64,
    pub err_est: f64,
}

#[derive(Clone, Debug)]
enum Kind {
    Closed(ClosedForm),
    Inversion,
    TBeta { base: Box<ScaleFunction>, beta: f64 },
    TDeltaTheta { base: Box<ScaleFunction>, delta: f64 },
}

/// Strategy label for reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Auto,
    ClosedForm,
    TheoremQuadrature,
    LaplaceInversion,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::ClosedForm => "closed_form",
            Strategy::TheoremQuadrature => "theorem_quadrature",
            Strategy::LaplaceInversion => "laplace_inversion",
        }
    }
}

/// A scale function W_ψ with its evaluation strategy. θ is computed once.
#[derive(Clone, Debug)]
pub struct ScaleFunction {
    psi: LaplaceExponent,
    kind: Kind,
    theta: f64,
    nodes: usize,
}

fn exponent_ok(psi: &LaplaceExponent) -> Result<()> {
    if psi.is_subordinator() {
        return Err(Error::Validation("scale functions are defined for spectrally negative exponents".into()));
    }
    Ok(())
}

impl ScaleFunction {
    /// Closed form when recognized, otherwise Laplace inversion.
    pub fn auto(psi: &LaplaceExponent) -> Result<Self> {
        match ClosedForm::recognize(psi) {
            Some(_) => Self::closed(psi),
            None => Self::inversion(psi),
        }
    }

    pub fn closed(psi: &LaplaceExponent) -> Result<Self> {
        exponent_ok(psi)?;
        let cf = ClosedForm::recognize(psi)
            .ok_or_else(|| Error::Unavailable(format!("no closed-form scale function for {}", psi.describe())))?;
        cf.validate()?;
        Ok(Self { theta: psi.theta()?, psi: psi.clone(), kind: Kind::Closed(cf), nodes: TALBOT_NODES })
    }

    pub fn inversion(psi: &LaplaceExponent) -> Result<Self> {
        Self::inversion_with(psi, TALBOT_NODES)
    }

    pub fn inversion_with(psi: &LaplaceExponent, nodes: usize) -> Result<Self> {
        exponent_ok(psi)?;
        if nodes < 8 {
            return Err(Error::Validation("Talbot inversion needs at least 8 nodes".into()));
        }
        Ok(Self { theta: psi.theta()?, psi: psi.clone(), kind: Kind::Inversion, nodes })
    }

    pub fn with_strategy(psi: &LaplaceExponent, s: Strategy) -> Result<Self> {
        match s {
            Strategy::Auto => Self::auto(psi),
            Strategy::ClosedForm => Self::closed(psi),
            Strategy::LaplaceInversion => Self::inversion(psi),
            Strategy::TheoremQuadrature => Self::theorem(psi),
        }
    }

    /// Build W for T_βψ or T_{δ,θ}ψ from the base scale function.
    pub fn theorem(psi: &LaplaceExponent) -> Result<Self> {
        exponent_ok(psi)?;
        let theta = psi.theta()?;
        match psi.node() {
            Node::T { base, delta, beta, .. } if delta == beta => {
                let b = ScaleFunction::auto(base)?;
                Ok(Self { psi: psi.clone(), kind: Kind::TBeta { base: Box::new(b), beta: *beta }, theta, nodes: TALBOT_NODES })
            }
            Node::T { base, delta, beta, .. } => {
                let b = ScaleFunction::auto(base)?;
                if (b.theta - beta).abs() > 1e-10 {
                    return Err(Error::Unavailable("T_{δ,β} with β != θ has no scale formula here".into()));
                }
                Ok(Self {
                    psi: psi.clone(),
                    kind: Kind::TDeltaTheta { base: Box::new(b), delta: *delta },
                    theta,
                    nodes: TALBOT_NODES,
                })
            }
            _ => Err(Error::Unavailable(format!("{} is not a transformed exponent", psi.describe()))),
        }
    }

    pub fn exponent(&self) -> &LaplaceExponent {
        &self.psi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn strategy(&self) -> Strategy {
        match self.kind {
            Kind::Closed(_) => Strategy::ClosedForm,
            Kind::Inversion => Strategy::LaplaceInversion,
            _ => Strategy::TheoremQuadrature,
        }
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        match &self.kind {
            Kind::Closed(c) => Some(c),
            _ => None,
        }
    }

    fn shift(&self) -> f64 {
        self.theta + 1f64.max(self.theta / 2.0)
    }

    /// W(0): 0 under unbounded variation, else 1/lim ψ(u)/u.
    fn w_at_zero(&self) -> Result<f64> {
        match self.psi.unbounded_variation() {
            Some(true) => Ok(0.0),
            _ => {
                let u = 1e8;
                Ok(u / self.psi.psi(u)?)
            }
        }
    }

    fn invert(&self, x: f64, nodes: usize, deriv: bool) -> Result<f64> {
        let c = self.shift();
        let w0 = if deriv { self.w_at_zero()? } else { 0.0 };
        let f = |s: Complex64| -> Result<Complex64> {
            let z = s + c;
            let p = self.psi.psi_c(z)?;
            Ok(if deriv { z / p - w0 } else { 1.0 / p })
        };
        Ok((c * x).exp() * talbot(f, x, nodes)?)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_with_err(x)?.value)
    }

    pub fn eval_with_err(&self, x: f64) -> Result<ScaleValue> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("scale function needs x >= 0, got {x}")));
        }
        match &self.kind {
            Kind::Closed(cf) => {
                let v = cf.eval(x, Convention::Derived)?;
                Ok(ScaleValue { value: v, err_est: 1e-14 * v.abs() })
            }
            Kind::Inversion => {
                if x == 0.0 {
                    return Ok(ScaleValue { value: self.w_at_zero()?, err_est: 0.0 });
                }
                let a = self.invert(x, self.nodes, false)?;
                let b = self.invert(x, self.nodes - 8, false)?;
                Ok(ScaleValue { value: a, err_est: (a - b).abs() })
            }
            Kind::TBeta { base, beta } => scale_tbeta_with_err(base, *beta, x),
            Kind::TDeltaTheta { base, delta } => scale_tdelta_theta_with_err(base, *delta, x),
        }
    }

    /// W'(x), x > 0.
    pub fn deriv(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain("W' is evaluated for x > 0".into()));
        }
        match &self.kind {
            Kind::Closed(cf) => cf.deriv(x),
            Kind::Inversion => self.invert(x, self.nodes, true),
            _ => {
                let h = 1e-5 * x.max(1e-3);
                let f = |y: f64| self.eval(y).unwrap_or(f64::NAN);
                let d = if x > 2.0 * h { quad::richardson_derivative(f, x, h) } else { quad::richardson_forward(f, x, h) };
                if d.is_finite() {
                    Ok(d)
                } else {
                    Err(Error::Numerical("W' by differences failed".into()))
                }
            }
        }
    }
}

fn integral_exp_w(w: &ScaleFunction, lambda: f64, x: f64) -> Result<quad::QuadResult> {
    let r = quad::integrate_left_singular(
        |y| (-lambda * y).exp() * w.eval(y).unwrap_or(f64::NAN),
        0.0,
        x,
        2.0,
        Tol::both(1e-12, 1e-11),
    )?;
    if !r.converged || !r.value.is_finite() {
        return Err(Error::Numerical(format!("scale quadrature failed (err {:.3e})", r.err)));
    }
    Ok(r)
}

/// W_{T_βψ}(x) = e^{−βx}W_ψ(x) + β∫_0^x e^{−βy}W_ψ(y)dy.
pub fn scale_tbeta(w: &ScaleFunction, beta: f64, x: f64) -> Result<f64> {
    Ok(scale_tbeta_with_err(w, beta, x)?.value)
}

fn scale_tbeta_with_err(w: &ScaleFunction, beta: f64, x: f64) -> Result<ScaleValue> {
    if !(beta >= 0.0) || !(x >= 0.0) {
        return Err(Error::Domain("scale_tbeta needs beta, x >= 0".into()));
    }
    let wx = w.eval_with_err(x)?;
    if beta == 0.0 || x == 0.0 {
        return Ok(wx);
    }
    let i = integral_exp_w(w, beta, x)?;
    Ok(ScaleValue {
        value: (-beta * x).exp() * wx.value + beta * i.value,
        err_est: wx.err_est + beta * (i.err + x * wx.err_est),
    })
}

/// W_{T_{δ,θ}ψ}(x) = e^{−θx}(W_ψ(x) + δe^{δx}∫_0^x e^{−δy}W_ψ(y)dy), for ψ'(0+) ≤ 0.
pub fn scale_tdelta_theta(w: &ScaleFunction, delta: f64, x: f64) -> Result<f64> {
    Ok(scale_tdelta_theta_with_err(w, delta, x)?.value)
}

fn scale_tdelta_theta_with_err(w: &ScaleFunction, delta: f64, x: f64) -> Result<ScaleValue> {
    if !(delta >= 0.0) || !(x >= 0.0) {
        return Err(Error::Domain("scale_tdelta_theta needs delta, x >= 0".into()));
    }
    let d0 = exponent::drift_at_zero(&w.psi, 1e-6);
    if d0.value > 1e-10 && !d0.killed {
        return Err(Error::Validation(format!("needs psi'(0+) <= 0, got {}", d0.value)));
    }
    let th = w.theta;
    let wx = w.eval_with_err(x)?;
    if delta == 0.0 || x == 0.0 {
        return Ok(ScaleValue { value: (-th * x).exp() * wx.value, err_est: wx.err_est });
    }
    let i = integral_exp_w(w, delta, x)?;
    let e = (-th * x).exp();
    Ok(ScaleValue {
        value: e * (wx.value + delta * (delta * x).exp() * i.value),
        err_est: e * (wx.err_est + delta * (delta * x).exp() * (i.err + x * wx.err_est)),
    })
}

/// Compact forms using W': ∫_0^x e^{−βy}W'(y)dy for T_β, or
/// e^{−(θ−δ)x}∫_0^x e^{−δy}W'(y)dy for T_{δ,θ}.
#[derive(Clone, Copy, Debug)]
pub enum CompactParams {
    TBeta(f64),
    TDeltaTheta { delta: f64 },
}

pub fn scale_compact_form(w: &ScaleFunction, p: CompactParams, x: f64) -> Result<f64> {
    if w.psi.unbounded_variation() != Some(true) {
        return Err(Error::Validation("compact forms need unbounded variation (W(0) = 0)".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain("x must be >= 0".into()));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let (lambda, pre) = match p {
        CompactParams::TBeta(b) => (b, 1.0),
        CompactParams::TDeltaTheta { delta } => (delta, (-(w.theta - delta) * x).exp()),
    };
    let r = quad::integrate_left_singular(
        |y| (-lambda * y).exp() * w.deriv(y).unwrap_or(f64::NAN),
        0.0,
        x,
        4.0,
        Tol::both(1e-12, 1e-11),
    )?;
    if !r.converged || !r.value.is_finite() {
        return Err(Error::Numerical("compact-form quadrature failed".into()));
    }
    Ok(pre * r.value)
}

/// |∫_0^A e^{−ux}W(x)dx − 1/ψ(u)| with a heuristic bound on the dropped tail.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LaplaceResidual {
    pub residual: f64,
    pub truncation_bound: f64,
    pub quadrature_err: f64,
}

pub fn verify_laplace_identity(w: &ScaleFunction, u: f64, a: f64, tol: f64) -> Result<LaplaceResidual> {
    let eps = 0.1;
    let th = w.theta;
    if !(u > th + eps) {
        return Err(Error::Validation(format!("need u > theta + {eps} (theta = {th}), got u = {u}")));
    }
    if !(a > 0.0) || !(tol > 0.0) {
        return Err(Error::Domain("need A > 0 and tol > 0".into()));
    }
    // W(x) ≤ e^{(θ+ε)x}/ψ'(θ+ε)
    let slope = w.psi.dpsi(th + eps)?;
    if !(slope > 0.0) {
        return Err(Error::Unavailable("tail bound needs psi'(theta + eps) > 0".into()));
    }
    let k = u - th - eps;
    let truncation_bound = (-k * a).exp() / (k * slope);
    let r = quad::integrate_left_singular(
        |x| (-u * x).exp() * w.eval(x).unwrap_or(f64::NAN),
        0.0,
        a,
        2.0,
        Tol::both(0.1 * tol, 1e-13),
    )?;
    if !r.value.is_finite() {
        return Err(Error::Numerical("Laplace-identity quadrature failed".into()));
    }
    Ok(LaplaceResidual {
        residual: (r.value - 1.0 / w.psi.psi(u)?).abs(),
        truncation_bound,
        quadrature_err: r.err,
    })
}

/// W_ψ(x) by numerical inversion; `tol` is a target relative error,
/// checked by comparing two node counts.
pub fn scale_inversion(psi: &LaplaceExponent, x: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tol must be positive".into()));
    }
    let w = ScaleFunction::inversion(psi)?;
    let v = w.eval_with_err(x)?;
    if v.err_est > tol * v.value.abs().max(1e-300) && v.err_est > 1e-14 {
        return Err(Error::Numerical(format!(
            "inversion at x = {x} did not reach relative {tol:.1e} (node-difference {:.3e})",
            v.err_est
        )));
    }
    Ok(v.value)
}

/// Closed-form W by tag.
pub fn scale_closed_form(form: &ClosedForm, x: f64, conv: Convention) -> Result<f64> {
    form.eval(x, conv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform;

    fn bm(sigma2: f64, drift: f64) -> LaplaceExponent {
        Family::Brownian { sigma2, drift, kappa: 0.0 }.into()
    }

    fn stable(alpha: f64, kappa: f64, c: f64) -> LaplaceExponent {
        Family::Stable { alpha, kappa, c }.into()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn talbot_recovers_classical_pairs() {
        // 1/s² ↔ t, 1/(s+1) ↔ e^{−t}, 1/√s ↔ 1/√(πt)
        for &t in &[0.1, 1.0, 5.0] {
            let v = talbot(|s| Ok(1.0 / (s * s)), t, TALBOT_NODES).unwrap();
            assert!(rel(v, t) < 1e-10);
            let v = talbot(|s| Ok(1.0 / (s + 1.0)), t, TALBOT_NODES).unwrap();
            assert!(rel(v, (-t).exp()) < 1e-10);
            let v = talbot(|s| Ok(1.0 / s.sqrt()), t, TALBOT_NODES).unwrap();
            assert!(rel(v, 1.0 / (PI * t).sqrt()) < 1e-10);
        }
    }

    #[test]
    fn node_count_accuracy() {
        // 48 nodes lose digits to e^{rt} cancellation in double precision
        let w = |m| talbot(|s| Ok(1.0 / (s * s)), 3.0, m).unwrap();
        let e32 = rel(w(32), 3.0);
        let e48 = rel(w(48), 3.0);
        assert!(e32 < 1e-11, "{e32}");
        assert!(e48 < 1e-6, "{e48}");
    }

    #[test]
    fn inversion_examples() {
        assert!(rel(scale_inversion(&bm(1.0, 0.0), 3.0, 1e-8).unwrap(), 6.0) < 1e-9);
        let s = stable(1.5, 0.0, 0.0);
        assert!(rel(scale_inversion(&s, 1.0, 1e-8).unwrap(), 1.0 / gamma(1.5)) < 1e-9);
        assert!((1.0 / gamma(1.5) - 1.128379).abs() < 1e-6);
        assert_eq!(scale_inversion(&s, 0.0, 1e-8).unwrap(), 0.0);
        assert!(scale_inversion(&s, -1.0, 1e-8).is_err());
    }

    #[test]
    fn brownian_negative_drift_is_exp_minus_one() {
        // ψ = u² − u: 1/ψ = 1/(u−1) − 1/u
        let p = bm(2.0, -1.0);
        let w = ScaleFunction::auto(&p).unwrap();
        for x in [0.3, 1.0, 2.5] {
            assert!(rel(w.eval(x).unwrap(), x.exp_m1()) < 1e-14);
            let inv = ScaleFunction::inversion(&p).unwrap().eval(x).unwrap();
            assert!(rel(inv, x.exp_m1()) < 1e-9);
        }
    }

    #[test]
    fn tbeta_examples() {
        let w = ScaleFunction::auto(&bm(1.0, 0.0)).unwrap();
        let v = scale_tbeta(&w, 2.0, 1.0).unwrap();
        assert!((v - (1.0 - (-2f64).exp())).abs() < 1e-10);
        assert!((v - 0.864665).abs() < 1e-6);
        assert_eq!(scale_tbeta(&w, 0.0, 1.3).unwrap(), w.eval(1.3).unwrap());
        assert_eq!(scale_tbeta(&w, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn tdelta_theta_examples() {
        let p = bm(2.0, -1.0);
        let w = ScaleFunction::auto(&p).unwrap();
        assert_eq!(w.theta(), 1.0);
        let (d, x) = (0.5f64, 1.0f64);
        // oracle: ∫_0^1 e^{−y/2}(e^y − 1) dy = 2(e^{1/2} − 1) − 2(1 − e^{−1/2})
        let int = 2.0 * (0.5f64.exp() - 1.0) - 2.0 * (1.0 - (-0.5f64).exp());
        let oracle = (-1f64).exp() * (1f64.exp_m1() + d * (d * x).exp() * int);
        assert!(rel(scale_tdelta_theta(&w, d, x).unwrap(), oracle) < 1e-11);
        assert_eq!(scale_tdelta_theta(&w, 0.0, x).unwrap(), (-x).exp() * x.exp_m1());
        // and it is the scale function of T_{δ,θ}ψ
        let t = transform::t_transform(&p, d, 1.0).unwrap();
        let inv = ScaleFunction::inversion(&t).unwrap().eval(x).unwrap();
        assert!(rel(inv, oracle) < 1e-8);
    }

    #[test]
    fn closed_form_examples() {
        let s = ClosedForm::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 };
        assert!(rel(s.eval(4.0, Convention::Derived).unwrap(), 2.0 / gamma(1.5)) < 1e-14);
        assert!((s.eval(4.0, Convention::Derived).unwrap() - 2.256758).abs() < 1e-6);
        let t = ClosedForm::Stable { alpha: 1.5, kappa: 0.0, c: 1.0 };
        let e = specfun::mittag_leffler(1.5, 1.5, 1.0).unwrap().value;
        assert!(rel(t.eval(1.0, Convention::Derived).unwrap(), (-1f64).exp() * e) < 1e-14);
        // printed T-stable form at α = 1.5, x = 1
        let p = ClosedForm::Pochhammer { alpha: 1.5 };
        let v = p.eval(1.0, Convention::Verbatim).unwrap();
        let oracle = (-1f64).exp() * (1.0 - (-1f64).exp()).sqrt() / gamma(1.5);
        assert!(rel(v, oracle) < 1e-14);
    }

    #[test]
    fn tempered_identity() {
        for &(k, c) in &[(0.0, 1.0), (0.5, 0.7), (2.0, 2.0)] {
            let a = ClosedForm::Stable { alpha: 1.5, kappa: k, c };
            let b = ClosedForm::Stable { alpha: 1.5, kappa: k + c.powf(1.5), c: 0.0 };
            for x in [0.5, 1.0, 3.0] {
                let l = a.eval(x, Convention::Derived).unwrap();
                let r = (-c * x).exp() * b.eval(x, Convention::Derived).unwrap();
                assert!((l - r).abs() <= 1e-10 * r.abs());
            }
        }
    }

    #[test]
    fn closed_forms_invert_their_exponents() {
        let cases: Vec<LaplaceExponent> = vec![
            stable(1.5, 0.0, 0.0),
            stable(1.3, 0.4, 0.8),
            bm(1.2, 0.3),
            Family::PochhammerSn { alpha: 1.5 }.into(),
            Family::PochhammerSn { alpha: 1.7 }.into(),
            transform::t_transform(&stable(1.5, 0.0, 0.0), 0.5, 0.0).unwrap(),
            transform::t_composed(&stable(1.6, 0.0, 0.0), 1.5, 0.5, 0.0).unwrap(),
            transform::t_transform(&Family::PochhammerSn { alpha: 1.5 }.into(), 0.4, 1.0).unwrap(),
            transform::t_composed(&Family::PochhammerSn { alpha: 1.5 }.into(), 0.8, 0.4, 1.0).unwrap(),
        ];
        for p in cases {
            let c = ScaleFunction::closed(&p).unwrap();
            let i = ScaleFunction::inversion(&p).unwrap();
            for x in [0.5, 1.0, 2.0] {
                let (a, b) = (c.eval(x).unwrap(), i.eval(x).unwrap());
                assert!(rel(a, b) < 1e-7, "{p:?} x={x}: {a} vs {b}");
                let (da, db) = (c.deriv(x).unwrap(), i.deriv(x).unwrap());
                assert!(rel(da, db) < 1e-6, "{p:?} x={x}: W' {da} vs {db}");
            }
        }
    }

    #[test]
    fn killed_stable_t_forms_match_theorem_route() {
        // T_{δ,0} applied formally to u^α − κ; base W_κ(x) = x^{α−1}E_{α,α}(κx^α)
        let (alpha, kappa, delta, beta) = (1.5, 0.6, 0.5, 1.7);
        let base = ScaleFunction::closed(&stable(alpha, kappa, 0.0)).unwrap();
        let g = ClosedForm::StableDelta0 { alpha, delta, kappa };
        let gb = ClosedForm::StableBetaDelta0 { alpha, delta, beta, kappa };
        for x in [0.5, 1.0] {
            // W_g = W_κ + δe^{δx}∫e^{−δy}W_κ
            let i = integral_exp_w(&base, delta, x).unwrap().value;
            let route = base.eval(x).unwrap() + delta * (delta * x).exp() * i;
            assert!(rel(g.eval(x, Convention::Derived).unwrap(), route) < 1e-9);
            // W_{T_β g} = e^{−βx}W_g + β∫e^{−βy}W_g
            let ig = quad::integrate_left_singular(
                |y| (-beta * y).exp() * g.eval(y, Convention::Derived).unwrap(),
                0.0,
                x,
                2.0,
                Tol::abs(1e-13),
            )
            .unwrap()
            .value;
            let route_b = (-beta * x).exp() * g.eval(x, Convention::Derived).unwrap() + beta * ig;
            assert!(rel(gb.eval(x, Convention::Derived).unwrap(), route_b) < 1e-9);
        }
    }

    #[test]
    fn printed_forms_differ_from_derived() {
        let f = ClosedForm::StableDelta0 { alpha: 1.5, delta: 0.5, kappa: 0.0 };
        let (d, v) = (f.eval(1.0, Convention::Derived).unwrap(), f.eval(1.0, Convention::Verbatim).unwrap());
        assert!(rel(d, v) > 1e-2);
        let p = ClosedForm::PochhammerDelta1 { alpha: 1.5, delta: 0.5 };
        let (d, v) = (p.eval(1.0, Convention::Derived).unwrap(), p.eval(1.0, Convention::Verbatim).unwrap());
        assert!(rel(d, v) > 1e-2);
    }

    #[test]
    fn compact_forms_agree() {
        let w = ScaleFunction::auto(&bm(1.0, 0.0)).unwrap();
        let v = scale_compact_form(&w, CompactParams::TBeta(2.0), 1.0).unwrap();
        assert!((v - 0.864665).abs() < 1e-6);
        assert_eq!(scale_compact_form(&w, CompactParams::TBeta(2.0), 0.0).unwrap(), 0.0);
        let s = ScaleFunction::auto(&stable(1.5, 0.0, 0.0)).unwrap();
        // ∫_0^1 e^{−y}y^{−1/2}/Γ(1/2) dy = γ(1/2,1)/Γ(1/2) = erf(1)
        let erf1 = specfun::lower_inc_gamma(0.5, 1.0).unwrap() / gamma(0.5);
        let c = scale_compact_form(&s, CompactParams::TBeta(1.0), 1.0).unwrap();
        assert!(rel(c, erf1) < 1e-10);
        assert!(rel(c, scale_tbeta(&s, 1.0, 1.0).unwrap()) < 1e-9);
        let p = ScaleFunction::auto(&bm(2.0, -1.0)).unwrap();
        let c = scale_compact_form(&p, CompactParams::TDeltaTheta { delta: 0.5 }, 1.5).unwrap();
        assert!(rel(c, scale_tdelta_theta(&p, 0.5, 1.5).unwrap()) < 1e-10);
    }

    #[test]
    fn laplace_identity_examples() {
        let w = ScaleFunction::auto(&bm(1.0, 0.0)).unwrap();
        assert!(verify_laplace_identity(&w, 1.0, 40.0, 1e-12).unwrap().residual <= 1e-10);
        let s = ScaleFunction::auto(&stable(1.5, 0.0, 0.0)).unwrap();
        assert!(verify_laplace_identity(&s, 2.0, 30.0, 1e-10).unwrap().residual <= 1e-6);
        let p = ScaleFunction::auto(&bm(2.0, -1.0)).unwrap();
        assert!(verify_laplace_identity(&p, 0.5, 30.0, 1e-10).is_err());
    }

    #[test]
    fn monotone_and_zero_at_zero() {
        for p in [stable(1.5, 0.3, 0.5), bm(1.0, -0.2), Family::PochhammerSn { alpha: 1.5 }.into()] {
            let w = ScaleFunction::auto(&p).unwrap();
            assert_eq!(w.eval(0.0).unwrap(), 0.0);
            let mut last = 0.0;
            for i in 1..40 {
                let v = w.eval(0.1 * i as f64).unwrap();
                assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn theorem_strategy_matches_inversion() {
        let s = stable(1.5, 0.0, 0.0);
        let t = transform::t_beta(&s, 1.0).unwrap();
        let th = ScaleFunction::theorem(&t).unwrap();
        let inv = ScaleFunction::inversion(&t).unwrap();
        for x in [0.5, 1.0, 2.0] {
            assert!(rel(th.eval(x).unwrap(), inv.eval(x).unwrap()) < 1e-7);
        }
    }
}
