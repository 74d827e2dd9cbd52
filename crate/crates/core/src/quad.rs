//! Adaptive Gauss–Kronrod (7/15) quadrature with global interval bisection.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub err: f64,
    pub converged: bool,
    pub evals: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_subdiv: usize,
}

impl Tol {
    pub fn abs(abs: f64) -> Self {
        Self { abs, rel: 0.0, max_subdiv: 4000 }
    }
    pub fn rel(rel: f64) -> Self {
        Self { abs: 0.0, rel, max_subdiv: 4000 }
    }
    pub fn both(abs: f64, rel: f64) -> Self {
        Self { abs, rel, max_subdiv: 4000 }
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}
impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// ∫_a^b f on a finite interval.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: Tol) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, err: 0.0, converged: true, evals: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integrate() needs finite limits; use integrate_to_inf".into()));
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Seg { a, b, val: v, err: e });
    let (mut total, mut err) = (v, e);
    let mut evals = 15;
    let mut n = 1;
    loop {
        if !total.is_finite() {
            return Err(Error::Numerical("non-finite integrand".into()));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(QuadResult { value: total, err, converged: true, evals });
        }
        if n >= tol.max_subdiv {
            return Ok(QuadResult { value: total, err, converged: false, evals });
        }
        let s = heap.pop().expect("heap never empty");
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // interval exhausted at machine resolution
            heap.push(Seg { err: 0.0, ..s });
            err = heap.iter().map(|q| q.err).sum();
            n += 1;
            continue;
        }
        let (v1, e1) = gk15(&mut f, s.a, m);
        let (v2, e2) = gk15(&mut f, m, s.b);
        evals += 30;
        total += v1 + v2 - s.val;
        err += e1 + e2 - s.err;
        heap.push(Seg { a: s.a, b: m, val: v1, err: e1 });
        heap.push(Seg { a: m, b: s.b, val: v2, err: e2 });
        n += 1;
        if n % 64 == 0 {
            // resum to shed accumulated rounding
            total = heap.iter().map(|q| q.val).sum();
            err = heap.iter().map(|q| q.err).sum();
        }
    }
}

/// ∫_a^∞ f via x = a + t/(1−t).
pub fn integrate_to_inf(mut f: impl FnMut(f64) -> f64, a: f64, tol: Tol) -> Result<QuadResult> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = a + t / (1.0 - t);
            let w = 1.0 / ((1.0 - t) * (1.0 - t));
            let v = f(x) * w;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫_a^b f where f has an integrable power singularity at `a`,
/// via x = a + (b−a)s^p.
pub fn integrate_left_singular(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, p: f64, tol: Tol) -> Result<QuadResult> {
    let w = b - a;
    integrate(
        |s| {
            if s <= 0.0 {
                return 0.0;
            }
            let x = a + w * s.powf(p);
            f(x) * w * p * s.powf(p - 1.0)
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫_a^b f with integrable power singularities at both ends.
pub fn integrate_both_singular(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    pa: f64,
    pb: f64,
    tol: Tol,
) -> Result<QuadResult> {
    let m = 0.5 * (a + b);
    let half = Tol { abs: 0.5 * tol.abs, ..tol };
    let l = integrate_left_singular(&mut f, a, m, pa, half)?;
    // reflect so that the singularity at b sits at the left end
    let r = integrate_left_singular(|y| f(a + b - y), a, m, pb, half)?;
    Ok(QuadResult {
        value: l.value + r.value,
        err: l.err + r.err,
        converged: l.converged && r.converged,
        evals: l.evals + r.evals,
    })
}

/// Richardson-extrapolated central difference (one level).
pub fn richardson_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Richardson-extrapolated forward difference (one level), for one-sided limits.
pub fn richardson_forward(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x)) / h;
    2.0 * d(h / 2.0) - d(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, Tol::abs(1e-14)).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_and_singular() {
        let r = integrate_to_inf(|x| (-x).exp(), 0.0, Tol::abs(1e-13)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        // ∫_0^1 x^{-1/2} = 2
        let r = integrate_left_singular(|x| x.powf(-0.5), 0.0, 1.0, 4.0, Tol::abs(1e-13)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        // Beta(0.3, 0.6) density mass
        let b = crate::specfun::beta(0.3, 0.6);
        let r = integrate_both_singular(|x| x.powf(-0.7) * (1.0 - x).powf(-0.4), 0.0, 1.0, 1.0 / 0.3, 1.0 / 0.6, Tol::abs(1e-12))
            .unwrap();
        assert!((r.value / b - 1.0).abs() < 1e-11);
    }

    #[test]
    fn derivative_helpers() {
        assert!((richardson_derivative(|x| x.sin(), 1.0, 1e-3) - 1f64.cos()).abs() < 1e-11);
        assert!((richardson_forward(|x| x.exp(), 0.0, 1e-4) - 1.0).abs() < 1e-7);
    }
}
