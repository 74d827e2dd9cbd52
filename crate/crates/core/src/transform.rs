//! The Esscher map E_β, the two-parameter map T_{δ,β}, its special case
//! T_β = T_{β,β}, the composition T^γ_{δ,β} = T_γ∘T_{δ,β}, and the image of
//! a Lévy triple under T_{δ,β}.

use crate::error::{Error, Result};
use crate::exponent::{self, JumpComponent, JumpMeasure, LaplaceExponent, LevyTriple, Node, LK_TOL};
use serde::{Deserialize, Serialize};

/// δ, β, γ ≥ 0. γ is used only by the composed map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformParams {
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
}

impl TransformParams {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("delta", self.delta), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{n} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} must be finite and >= 0, got {v}")))
    }
}

/// ψ(0) = 0 and ψ'(0+) = 0, needed when β = 0.
fn check_flat_at_zero(psi: &LaplaceExponent) -> Result<()> {
    let p0 = psi.psi(0.0)?;
    if p0.abs() > 1e-12 {
        return Err(Error::Validation(format!("beta = 0 needs psi(0) = 0, got {p0}")));
    }
    let d = exponent::drift_at_zero(psi, 1e-6).value;
    if !(d.abs() <= 1e-7) {
        return Err(Error::Validation(format!("beta = 0 needs psi'(0+) = 0, got {d}")));
    }
    Ok(())
}

/// u ↦ ψ(u+β) − ψ(β).
pub fn esscher(psi: &LaplaceExponent, beta: f64) -> Result<LaplaceExponent> {
    nonneg("beta", beta)?;
    if beta == 0.0 {
        return Ok(psi.clone());
    }
    let psi_beta = psi.psi(beta)?;
    Ok(LaplaceExponent::wrap(Node::Esscher { base: psi.clone(), beta, psi_beta }))
}

/// T_{δ,β}ψ(u) = (u+β−δ)/(u+β)·ψ(u+β) − (β−δ)/β·ψ(β).
pub fn t_transform(psi: &LaplaceExponent, delta: f64, beta: f64) -> Result<LaplaceExponent> {
    nonneg("delta", delta)?;
    nonneg("beta", beta)?;
    if delta == 0.0 && beta == 0.0 {
        return Ok(psi.clone());
    }
    if delta == 0.0 {
        return esscher(psi, beta);
    }
    let psi_beta = if beta == 0.0 {
        check_flat_at_zero(psi)?;
        0.0
    } else {
        psi.psi(beta)?
    };
    Ok(LaplaceExponent::wrap(Node::T { base: psi.clone(), delta, beta, psi_beta }))
}

/// T_β = T_{β,β}: u ↦ u/(u+β)·ψ(u+β).
pub fn t_beta(psi: &LaplaceExponent, beta: f64) -> Result<LaplaceExponent> {
    t_transform(psi, beta, beta)
}

/// T^γ_{δ,β} from its closed form.
pub fn t_composed(psi: &LaplaceExponent, gamma: f64, delta: f64, beta: f64) -> Result<LaplaceExponent> {
    nonneg("gamma", gamma)?;
    nonneg("delta", delta)?;
    nonneg("beta", beta)?;
    if gamma == 0.0 {
        return t_transform(psi, delta, beta);
    }
    let psi_beta = if beta == 0.0 {
        if delta > 0.0 {
            check_flat_at_zero(psi)?;
        }
        0.0
    } else {
        psi.psi(beta)?
    };
    Ok(LaplaceExponent::wrap(Node::Composed { base: psi.clone(), gamma, delta, beta, psi_beta }))
}

/// ψ_θ(u) = ψ(u+θ).
pub fn shift(psi: &LaplaceExponent, theta: f64) -> Result<LaplaceExponent> {
    if theta == 0.0 {
        return Ok(psi.clone());
    }
    psi.psi(theta)?;
    Ok(LaplaceExponent::wrap(Node::Shift { base: psi.clone(), theta }))
}

/// T_{−θ}ψ_θ read as u ↦ u/(u−θ)·ψ(u), with the removable point at u = θ.
pub fn neg_theta_shift(psi: &LaplaceExponent, theta: f64) -> Result<LaplaceExponent> {
    nonneg("theta", theta)?;
    if theta == 0.0 {
        return Ok(psi.clone());
    }
    let r = psi.psi(theta)?;
    if r.abs() > 1e-9 {
        return Err(Error::Validation(format!("theta must be a root of psi, psi(theta) = {r}")));
    }
    Ok(LaplaceExponent::wrap(Node::NegTheta { base: psi.clone(), theta }))
}

/// Image of a triple under T_{δ,β}: jumps e^{βx}Π(dx) + δe^{βx}Π(−∞,x)dx +
/// δκe^{βx}dx, same σ², no killing, and a fixed by matching the defining
/// formula at u = 1.
///
/// The killing term: −δE_β(−κ/u) = −δκu/(β(u+β)) = ∫(e^{ux}−1)δκe^{βx}dx,
/// so the exponential density carries weight δκ, not δκ/β.
pub fn transformed_triple(t: &LevyTriple, delta: f64, beta: f64) -> Result<LevyTriple> {
    nonneg("delta", delta)?;
    nonneg("beta", beta)?;
    t.validate()?;
    if beta == 0.0 && t.kappa > 0.0 {
        return Err(Error::Validation("beta = 0 needs kappa = 0".into()));
    }
    let base = LaplaceExponent::triple(t.clone())?;
    let target = t_transform(&base, delta, beta)?.psi(1.0)?;

    let mut comps = Vec::new();
    if !t.jumps.is_empty() {
        comps.push(if beta == 0.0 {
            JumpComponent::Tilt { beta: 0.0, base: t.jumps.clone() }
        } else {
            JumpComponent::Tilt { beta, base: t.jumps.clone() }
        });
        if delta > 0.0 {
            comps.push(JumpComponent::TiltedTail { delta, beta, base: t.jumps.clone() });
        }
    }
    if delta > 0.0 && t.kappa > 0.0 {
        comps.push(JumpComponent::Exp { weight: delta * t.kappa, rate: beta });
    }
    let jumps = JumpMeasure { components: comps };
    let lk1 = jumps.lk_integral(1.0, 0.1 * LK_TOL)?;
    let a = target - 0.5 * t.sigma2 - lk1;
    Ok(LevyTriple { kappa: 0.0, a, sigma2: t.sigma2, jumps })
}

/// Worst |T_γ(T_βψ)(u) − T_{γ+β}ψ(u)| over the grid.
pub fn semigroup_check(psi: &LaplaceExponent, beta: f64, gamma: f64, grid: &[f64]) -> Result<f64> {
    let lhs = t_beta(&t_beta(psi, beta)?, gamma)?;
    let rhs = t_beta(psi, beta + gamma)?;
    let mut worst = 0.0f64;
    for &u in grid {
        worst = worst.max((lhs.psi(u)? - rhs.psi(u)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Family;
    use proptest::prelude::*;

    fn bm(sigma2: f64) -> LaplaceExponent {
        Family::Brownian { sigma2, drift: 0.0, kappa: 0.0 }.into()
    }

    fn stable(alpha: f64) -> LaplaceExponent {
        Family::Stable { alpha, kappa: 0.0, c: 0.0 }.into()
    }

    #[test]
    fn esscher_examples() {
        let e = esscher(&bm(1.0), 1.0).unwrap();
        for u in [0.0, 0.5, 2.0] {
            assert!((e.eval(u).unwrap() - (0.5 * u * u + u)).abs() < 1e-15);
        }
        let e = esscher(&stable(1.5), 1.0).unwrap();
        assert!((e.eval(1.0).unwrap() - (2f64.powf(1.5) - 1.0)).abs() < 1e-14);
        assert!((e.eval(1.0).unwrap() - 1.828427).abs() < 1e-6);
        assert_eq!(esscher(&bm(1.0), 0.0).unwrap().eval(3.0).unwrap(), 4.5);
        // E_β and T_{0,β} agree
        let t = t_transform(&stable(1.5), 0.0, 0.7).unwrap();
        let e = esscher(&stable(1.5), 0.7).unwrap();
        assert_eq!(t.eval(1.3).unwrap(), e.eval(1.3).unwrap());
    }

    #[test]
    fn t_examples() {
        let t = t_transform(&bm(1.0), 2.0, 2.0).unwrap();
        assert!((t.eval(1.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(t_transform(&bm(1.0), 0.0, 0.0).unwrap().eval(2.0).unwrap(), 2.0);
        // β = 0 on ψ'(0+) ≠ 0 is rejected
        let d = Family::Brownian { sigma2: 1.0, drift: 1.0, kappa: 0.0 }.into();
        assert!(t_transform(&d, 0.5, 0.0).is_err());
        // T_{δ,0} at 0 is 0 by extension
        assert_eq!(t_transform(&stable(1.5), 0.5, 0.0).unwrap().eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn composed_examples() {
        let sq: LaplaceExponent = Family::Brownian { sigma2: 2.0, drift: 0.0, kappa: 0.0 }.into();
        let c = t_composed(&sq, 1.0, 1.0, 1.0).unwrap();
        assert!((c.eval(1.0).unwrap() - 3.0).abs() < 1e-14);
        let c = t_composed(&sq, 1.0, 0.0, 0.0).unwrap();
        let oracle = |u: f64| u / (u + 1.0) * (u + 1.0).powi(2);
        assert!((c.eval(2.0).unwrap() - oracle(2.0)).abs() < 1e-14);
        let s = stable(1.4);
        for (g, d, b) in [(1.0, 0.3, 0.8), (0.5, 1.2, 0.4), (2.0, 0.5, 0.0)] {
            let c = t_composed(&s, g, d, b).unwrap();
            let p = t_beta(&t_transform(&s, d, b).unwrap(), g).unwrap();
            for u in [0.1, 0.7, 1.0, 3.0, 10.0] {
                let (x, y) = (c.eval(u).unwrap(), p.eval(u).unwrap());
                assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0), "{g} {d} {b} {u}: {x} {y}");
            }
        }
    }

    #[test]
    fn cp_exp_closed_form() {
        let (c, b, k, beta) = (1.3, 0.7, 0.4, 0.9);
        let phi: LaplaceExponent = Family::CpExpSub { c, b, kappa: k }.into();
        let t = t_beta(&phi, beta).unwrap();
        for u in [0.0, 0.2, 1.0, 4.0] {
            let oracle = c * u / (u + b + beta) + k * u / (u + beta);
            assert!((t.eval(u).unwrap() - oracle).abs() < 1e-13);
        }
    }

    #[test]
    fn semigroup_examples() {
        assert_eq!(semigroup_check(&bm(1.0), 0.0, 0.0, &[0.5, 1.0]).unwrap(), 0.0);
        assert!(semigroup_check(&bm(1.0), 1.0, 2.0, &[0.5, 1.0, 5.0]).unwrap() <= 1e-12);
        let s: LaplaceExponent = Family::StableSub { alpha: 0.5 }.into();
        assert!(semigroup_check(&s, 0.3, 0.7, &[0.5, 1.0, 5.0]).unwrap() <= 1e-12);
    }

    #[test]
    fn triple_examples() {
        let atom = LevyTriple {
            kappa: 0.0,
            a: 0.0,
            sigma2: 0.0,
            jumps: JumpMeasure::single(JumpComponent::Atom { at: -1.0, mass: 1.0 }),
        };
        let r = transformed_triple(&atom, 0.0, 1.0).unwrap();
        let atoms = r.jumps.atoms();
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].1 - (-1f64).exp()).abs() < 1e-15);

        let g = LevyTriple { kappa: 0.0, a: 0.0, sigma2: 1.0, jumps: JumpMeasure::default() };
        let r = transformed_triple(&g, 1.0, 1.0).unwrap();
        assert_eq!(r.sigma2, 1.0);
        assert!(r.jumps.is_empty());
        // T_1(u²/2) = u²/2 + u/2
        assert!((r.a - 0.5).abs() < 1e-14);
        let e = LaplaceExponent::triple(r).unwrap();
        for u in [0.5, 2.0] {
            assert!((e.psi(u).unwrap() - u * (u + 1.0) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn stable_triple_image() {
        let f = Family::Stable { alpha: 1.5, kappa: 0.0, c: 0.0 };
        let t = f.to_triple().unwrap();
        let r = transformed_triple(&t, 1.0, 1.0).unwrap();
        let target = t_transform(&f.into(), 1.0, 1.0).unwrap();
        for u in [0.5, 1.0, 2.0] {
            let v = exponent::eval_lk_triple(&r, u, 1e-10).unwrap();
            assert!((v - target.psi(u).unwrap()).abs() < 1e-8, "u={u}");
        }
    }

    #[test]
    fn killed_triple_image() {
        // κ > 0 contributes the exponential density δ(κ/β)e^{βx}
        let f = Family::CpExpSub { c: 1.0, b: 2.0, kappa: 0.5 };
        let t = f.to_triple().unwrap();
        let (d, b) = (0.6, 1.5);
        let r = transformed_triple(&t, d, b).unwrap();
        let target = t_transform(&f.into(), d, b).unwrap();
        for u in [0.3, 2.0, 5.0] {
            let v = exponent::eval_lk_triple(&r, u, 1e-10).unwrap();
            assert!((v - target.psi(u).unwrap()).abs() < 1e-8, "u={u}: {v} vs {}", target.psi(u).unwrap());
        }
        assert!(transformed_triple(&t, d, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn no_killing_and_phi_split(alpha in 1.05f64..1.95, c in 0.0f64..2.0, delta in 0.0f64..3.0, beta in 0.01f64..3.0, u in 0.0f64..20.0) {
            let psi: LaplaceExponent = Family::Stable { alpha, kappa: 0.0, c }.into();
            let t = t_transform(&psi, delta, beta).unwrap();
            prop_assert!(t.eval(0.0).unwrap().abs() < 1e-13);
            // E_βψ(u) − δ·E_βΦ(u), Φ(u) = ψ(u)/u
            let phi = |v: f64| psi.psi(v).unwrap() / v;
            let split = psi.psi(u + beta).unwrap() - psi.psi(beta).unwrap() - delta * (phi(u + beta) - phi(beta));
            let v = t.eval(u).unwrap();
            prop_assert!((v - split).abs() <= 1e-13 * v.abs().max(1.0));
        }

        #[test]
        fn semigroup_all_families(beta in 0.0f64..3.0, gamma in 0.0f64..3.0, which in 0usize..5) {
            let psi: LaplaceExponent = match which {
                0 => Family::Brownian { sigma2: 1.3, drift: -0.4, kappa: 0.2 }.into(),
                1 => Family::Stable { alpha: 1.6, kappa: 0.5, c: 0.3 }.into(),
                2 => Family::PochhammerSn { alpha: 1.4 }.into(),
                3 => Family::CpExpSub { c: 1.0, b: 0.5, kappa: 0.3 }.into(),
                _ => Family::LampertiStableSub { alpha: 0.4 }.into(),
            };
            let worst = semigroup_check(&psi, beta + 0.01, gamma, &[0.1, 0.5, 1.0, 4.0]).unwrap();
            prop_assert!(worst <= 1e-12 * 10.0f64.max(psi.psi(8.0).unwrap().abs()), "{worst}");
        }

        #[test]
        fn transformed_exponent_is_valid(alpha in 1.05f64..1.95, delta in 0.0f64..2.0, beta in 0.05f64..2.0) {
            let psi: LaplaceExponent = Family::Stable { alpha, kappa: 0.3, c: 0.0 }.into();
            let t = t_transform(&psi, delta, beta).unwrap();
            let grid: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
            prop_assert!(exponent::validate(&t, &grid).unwrap().all_pass());
        }
    }
}
