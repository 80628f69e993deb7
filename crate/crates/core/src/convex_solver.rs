//! Minimization of a convex relaxation over its box by projected gradient
//! descent. The trial step length is the Barzilai-Borwein quotient of the
//! last two iterates; a nonmonotone Armijo backtrack along the projected
//! direction keeps every iterate feasible.

use crate::config::SolverConfig;
use crate::error::Result;
use crate::expression::Objective;
use crate::geometry::BoxRegion;
use crate::relaxation::{relaxed_gradient, relaxed_value};

const SHRINK: f64 = 0.5;
const SUFFICIENT_DECREASE: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;
const SPECTRAL_MIN: f64 = 1e-12;
const SPECTRAL_MAX: f64 = 1e12;
/// Armijo compares against the worst of this many recent values.
const MEMORY: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub minimizer: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `||x - P(x - g)||_inf`, zero exactly at KKT points of the box problem.
pub fn projected_gradient_norm(region: &BoxRegion, x: &[f64], g: &[f64]) -> f64 {
    let (a, b) = (region.lower(), region.upper());
    (0..x.len())
        .map(|i| (x[i] - (x[i] - g[i]).clamp(a[i], b[i])).abs())
        .fold(0.0, f64::max)
}

/// Minimizes `F = f + sum alpha_i (a_i - x_i)(b_i - x_i)` on `region`,
/// starting from the midpoint. Convexity of `F` is the caller's concern.
pub fn minimize_on_box(
    objective: &Objective,
    region: &BoxRegion,
    alpha: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let n = region.dimension();
    let mut x = region.midpoint();
    let mut fx = relaxed_value(objective, region, alpha, &x)?;
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut spectral = 1.0;
    let mut recent = std::collections::VecDeque::from([fx]);
    let mut best = (x.clone(), fx);
    let mut iterations = 0;
    let mut converged = false;

    relaxed_gradient(objective, region, alpha, &x, &mut g)?;
    while iterations < cfg.inner_max_iters {
        if projected_gradient_norm(region, &x, &g) <= cfg.inner_tol {
            converged = true;
            break;
        }
        iterations += 1;

        for i in 0..n {
            dir[i] = x[i] - spectral * g[i];
        }
        region.project(&mut dir);
        for i in 0..n {
            dir[i] -= x[i];
        }
        let slope: f64 = (0..n).map(|i| g[i] * dir[i]).sum();

        let reference = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut t = 1.0;
        let mut ft;
        loop {
            for i in 0..n {
                trial[i] = x[i] + t * dir[i];
            }
            region.project(&mut trial);
            ft = relaxed_value(objective, region, alpha, &trial)?;
            if ft <= reference + SUFFICIENT_DECREASE * t * slope || t < MIN_STEP {
                break;
            }
            t *= SHRINK;
        }
        if t < MIN_STEP {
            // No representable step decreases F; x is stationary to rounding.
            converged = projected_gradient_norm(region, &x, &g) <= cfg.inner_tol.sqrt();
            break;
        }

        relaxed_gradient(objective, region, alpha, &trial, &mut g_new)?;
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..n {
            let s = trial[i] - x[i];
            ss += s * s;
            sy += s * (g_new[i] - g[i]);
        }
        spectral = if sy > 0.0 {
            (ss / sy).clamp(SPECTRAL_MIN, SPECTRAL_MAX)
        } else {
            SPECTRAL_MAX
        };
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        fx = ft;
        if recent.len() == MEMORY {
            recent.pop_front();
        }
        recent.push_back(fx);
        if fx < best.1 {
            best = (x.clone(), fx);
        }
    }

    if !converged {
        // Without the monotone guarantee the last iterate need not be the best.
        if best.1 < fx {
            (x, fx) = best;
        }
        log::warn!(
            "inner solve on {region} stopped after {iterations} iterations without converging"
        );
    }
    Ok(SolveResult {
        minimizer: x,
        value: fx,
        iterations,
        converged,
    })
}
