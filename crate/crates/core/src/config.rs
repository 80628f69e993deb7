use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tunables for the outer loop, the inner convex solver and post-processing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Termination threshold on the largest modified width among active boxes.
    pub epsilon: f64,
    /// A child is kept while its relaxed minimum is at most `v_glob + discard_margin`.
    pub discard_margin: f64,
    /// Projected-gradient stationarity tolerance of the inner solver.
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Candidates within this much of the best retained value form the solution set.
    pub filter_tol: f64,
    /// Euclidean merge radius used to count distinct solutions.
    pub cluster_delta: f64,
    pub max_outer_iters: usize,
    /// Relative outward widening applied to Hessian-entry enclosures; 0 disables.
    pub hessian_slack: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            discard_margin: 1e-6,
            inner_tol: 1e-8,
            inner_max_iters: 5000,
            filter_tol: 1e-6,
            cluster_delta: 1e-2,
            max_outer_iters: 1_000_000,
            hessian_slack: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("discard_margin", self.discard_margin),
            ("inner_tol", self.inner_tol),
            ("filter_tol", self.filter_tol),
            ("cluster_delta", self.cluster_delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.inner_max_iters == 0 || self.max_outer_iters == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if !(self.hessian_slack >= 0.0) {
            return Err(Error::Config("hessian_slack must be non-negative".into()));
        }
        if self.inner_tol >= self.epsilon {
            return Err(Error::Config("inner_tol must be smaller than epsilon".into()));
        }
        Ok(())
    }
}
