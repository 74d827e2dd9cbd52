//! Browser bindings: a scale function curve, a transformed exponent, and
//! the q-series density. Each returns a flat array of samples on a grid.

use levyx::expfunctional::{closed_laws, ClosedLaw, ExampleLaw};
use levyx::scale::ScaleFunction;
use levyx::{schema, transform};
use wasm_bindgen::prelude::*;

fn grid(x_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(x_max > 0.0 && x_max.is_finite()) || !(2..=10_000).contains(&n) {
        return Err("need x_max > 0 and 2 <= n <= 10000".into());
    }
    Ok((0..n).map(|i| x_max * i as f64 / (n - 1) as f64).collect())
}

/// W(x) for the exponent in `spec`, at n points on [0, x_max].
pub fn scale_curve_impl(spec: &str, x_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let psi = schema::parse_spec(spec).map_err(|e| e.to_string())?;
    let w = ScaleFunction::auto(&psi).map_err(|e| e.to_string())?;
    grid(x_max, n)?.into_iter().map(|x| w.eval(x).map_err(|e| e.to_string())).collect()
}

/// ψ(u) and T_{δ,β}ψ(u) interleaved, at n points on [0, u_max].
pub fn transform_eval_impl(spec: &str, delta: f64, beta: f64, u_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let psi = schema::parse_spec(spec).map_err(|e| e.to_string())?;
    let t = transform::t_transform(&psi, delta, beta).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * n);
    for u in grid(u_max, n)? {
        out.push(psi.eval(u).map_err(|e| e.to_string())?);
        out.push(t.eval(u).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

/// Density of I for φ(u) = 1 − q^u, reweighted by x^β, at n points on [0, x_max].
pub fn poisson_density_impl(q: f64, beta: f64, x_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let ClosedLaw::Density(f) = closed_laws(ExampleLaw::Poisson { q, beta }).map_err(|e| e.to_string())? else {
        return Err("no density form".into());
    };
    Ok(grid(x_max, n)?.into_iter().map(|x| f.eval(x)).collect())
}

#[wasm_bindgen]
pub fn scale_curve(spec: &str, x_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    scale_curve_impl(spec, x_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn transform_eval(spec: &str, delta: f64, beta: f64, u_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    transform_eval_impl(spec, delta, beta, u_max, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn poisson_density(q: f64, beta: f64, x_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    poisson_density_impl(q, beta, x_max, n).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BM: &str = r#"{"family":"brownian","params":{"sigma2":1}}"#;

    #[test]
    fn curves() {
        let w = scale_curve_impl(BM, 2.0, 5).unwrap();
        for (i, v) in w.iter().enumerate() {
            // W(x) = 2x
            assert!((v - i as f64).abs() < 1e-12);
        }
        let t = transform_eval_impl(BM, 1.0, 1.0, 1.0, 2).unwrap();
        // u²/2 and u(u+1)/2 at u = 1
        assert_eq!(t.len(), 4);
        assert!((t[2] - 0.5).abs() < 1e-15 && (t[3] - 1.0).abs() < 1e-15);
        let d = poisson_density_impl(0.5, 0.0, 10.0, 201).unwrap();
        let h = 10.0 / 200.0;
        let mass: f64 = d.iter().sum::<f64>() * h;
        assert!((mass - 1.0).abs() < 1e-2, "{mass}");
        assert!(scale_curve_impl("{}", 1.0, 3).is_err());
        assert!(poisson_density_impl(0.5, 0.0, 1.0, 1).is_err());
    }
}
