//! WebAssembly bindings for the page in `www/`.
//!
//! Each export has a plain Rust twin returning `Result<_, String>` so the
//! logic can be tested natively.

use convexify::relaxation::{certify, relaxed_value};
use convexify::{solve, BoxRegion, Expression, Objective, SolverConfig};
use wasm_bindgen::prelude::*;

/// Solves `function` over `region` (e.g. `[-6,6]x[-6,6]`) and returns the
/// run report as JSON, box lists included.
pub fn solve_json(function: &str, region: &str, eps: f64) -> Result<String, String> {
    let domain: BoxRegion = region.parse().map_err(|e| format!("{e}"))?;
    let objective = Objective::parse(function, domain.dimension()).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        epsilon: eps,
        ..SolverConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    let report = solve(&objective, &domain, &cfg).map_err(|e| e.to_string())?;
    Ok(report.to_json())
}

/// Samples a one-variable `function` on `[lo, hi]` cut into `pieces` equal
/// cells, each with its own convex relaxation. Returns `x, f(x), F(x)`
/// triples, flattened, `samples` per cell.
pub fn relaxation_samples(
    function: &str,
    lo: f64,
    hi: f64,
    pieces: usize,
    samples: usize,
) -> Result<Vec<f64>, String> {
    if pieces == 0 || samples < 2 {
        return Err("need at least one piece and two samples".into());
    }
    let objective = Objective::parse(function, 1).map_err(|e| e.to_string())?;
    BoxRegion::new(vec![lo], vec![hi]).map_err(|e| e.to_string())?;
    let h = (hi - lo) / pieces as f64;
    let mut out = Vec::with_capacity(3 * pieces * samples);
    for k in 0..pieces {
        let a = lo + h * k as f64;
        let b = if k + 1 == pieces { hi } else { a + h };
        let cell = BoxRegion::new(vec![a], vec![b]).map_err(|e| e.to_string())?;
        let cert = certify(&objective, &cell, 0.0).map_err(|e| e.to_string())?;
        for s in 0..samples {
            let x = [a + (b - a) * s as f64 / (samples - 1) as f64];
            let f = objective.value(&x).map_err(|e| e.to_string())?;
            let r = relaxed_value(&objective, &cell, &cert.alpha, &x).map_err(|e| e.to_string())?;
            out.extend([x[0], f, r]);
        }
    }
    Ok(out)
}

/// The partial derivative of `function` with respect to `x<var>`, as text.
pub fn derivative_text(function: &str, dimension: usize, var: usize) -> Result<String, String> {
    let expr = Expression::parse(function, dimension).map_err(|e| e.to_string())?;
    if var == 0 || var > dimension {
        return Err(format!("no variable x{var} in dimension {dimension}"));
    }
    Ok(expr.differentiate(var - 1).to_string())
}

#[wasm_bindgen(js_name = solveProblem)]
pub fn solve_problem(function: &str, region: &str, eps: f64) -> Result<String, JsError> {
    solve_json(function, region, eps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = relaxationProfile)]
pub fn relaxation_profile(
    function: &str,
    lo: f64,
    hi: f64,
    pieces: usize,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    relaxation_samples(function, lo, hi, pieces, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn derivative(function: &str, dimension: usize, var: usize) -> Result<String, JsError> {
    derivative_text(function, dimension, var).map_err(|e| JsError::new(&e))
}
