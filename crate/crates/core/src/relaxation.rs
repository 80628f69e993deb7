//! Convex underestimators of the form
//! `F(x) = f(x) + sum_i alpha_i (a_i - x_i)(b_i - x_i)` on a box `[a, b]`.
//!
//! The shift `alpha` comes from a scaled Gerschgorin bound on the interval
//! Hessian. The same bound evaluated with unit scaling gives `lambda_tilde`,
//! a lower bound on the smallest Hessian eigenvalue over the box; when it is
//! non-negative the objective is already convex there and `alpha = 0`.

use crate::error::{Error, Result};
use crate::expression::Objective;
use crate::geometry::BoxRegion;
use crate::interval::{interval_evaluate, Interval};

/// Widths at or below this are treated as degenerate: their alpha is zero and
/// they drop out of the scaled off-diagonal sums.
pub const DEGENERATE_WIDTH: f64 = 1e-14;

/// Symmetric n x n matrix of Hessian-entry enclosures over one box.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianBounds {
    n: usize,
    entries: Vec<Interval>,
}

impl HessianBounds {
    /// Builds from the upper triangle, `upper(i, j)` for `j >= i`.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> Interval) -> Self {
        let mut entries = vec![Interval::point(0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let v = upper(i, j);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Self { n, entries }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.entries[i * self.n + j]
    }

    // Row i of the Gerschgorin bound: lo(H_ii) - sum_{j != i} |H_ij| * scale(j).
    fn row_bound(&self, i: usize, scale: impl Fn(usize) -> f64) -> f64 {
        let off: f64 = (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.get(i, j).magnitude() * scale(j))
            .sum();
        self.get(i, i).lo() - off
    }
}

/// Encloses every second partial derivative of `objective` over `region`.
pub fn hessian_interval_bounds(
    objective: &Objective,
    region: &BoxRegion,
    slack: f64,
) -> Result<HessianBounds> {
    let n = objective.dimension();
    if region.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: region.dimension(),
        });
    }
    let mut upper = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            upper.push(interval_evaluate(objective.hessian_entry(i, j), region)?.widen(slack));
        }
    }
    let mut it = upper.into_iter();
    Ok(HessianBounds::from_upper(n, |_, _| it.next().unwrap()))
}

/// Lower bound on the minimum Hessian eigenvalue (unscaled Gerschgorin).
pub fn lambda_tilde(bounds: &HessianBounds) -> f64 {
    (0..bounds.dimension())
        .map(|i| bounds.row_bound(i, |_| 1.0))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCertificate {
    pub alpha: Vec<f64>,
    pub lambda_tilde: f64,
    pub hessian_bounds: HessianBounds,
}

impl AlphaCertificate {
    pub fn is_convex(&self) -> bool {
        self.lambda_tilde >= 0.0
    }
}

/// Per-dimension shifts from the width-scaled Gerschgorin bound, or all zeros
/// when `lambda_tilde` already certifies convexity.
pub fn compute_alpha(bounds: HessianBounds, region: &BoxRegion) -> Result<AlphaCertificate> {
    let n = bounds.dimension();
    if region.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: region.dimension(),
        });
    }
    let lt = lambda_tilde(&bounds);
    let mut alpha = vec![0.0; n];
    if lt < 0.0 {
        let d = region.widths();
        for i in 0..n {
            if d[i] <= DEGENERATE_WIDTH {
                continue;
            }
            let row = bounds.row_bound(i, |j| {
                if d[j] <= DEGENERATE_WIDTH {
                    0.0
                } else {
                    d[j] / d[i]
                }
            });
            alpha[i] = (-0.5 * row).max(0.0);
        }
    }
    if !lt.is_finite() || alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFiniteAlpha);
    }
    Ok(AlphaCertificate {
        alpha,
        lambda_tilde: lt,
        hessian_bounds: bounds,
    })
}

/// Hessian bounds, `lambda_tilde` and `alpha` for one box.
pub fn certify(objective: &Objective, region: &BoxRegion, slack: f64) -> Result<AlphaCertificate> {
    compute_alpha(hessian_interval_bounds(objective, region, slack)?, region)
}

fn quadratic_shift(region: &BoxRegion, alpha: &[f64], x: &[f64]) -> f64 {
    let (a, b) = (region.lower(), region.upper());
    (0..x.len())
        .map(|i| alpha[i] * (a[i] - x[i]) * (b[i] - x[i]))
        .sum()
}

pub fn relaxed_value(
    objective: &Objective,
    region: &BoxRegion,
    alpha: &[f64],
    x: &[f64],
) -> Result<f64> {
    debug_assert!(region.contains_with_slack(x, 1e-9), "point outside box");
    Ok(objective.value(x)? + quadratic_shift(region, alpha, x))
}

pub fn relaxed_gradient(
    objective: &Objective,
    region: &BoxRegion,
    alpha: &[f64],
    x: &[f64],
    out: &mut [f64],
) -> Result<()> {
    objective.gradient(x, out)?;
    let (a, b) = (region.lower(), region.upper());
    for i in 0..x.len() {
        out[i] += alpha[i] * (2.0 * x[i] - a[i] - b[i]);
    }
    Ok(())
}

/// Largest gap `f - F` over the box, attained at the midpoint.
pub fn separation_distance(region: &BoxRegion, alpha: &[f64]) -> f64 {
    region
        .modified_width(alpha)
        .expect("alpha has the box dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn obj(text: &str, n: usize) -> Objective {
        Objective::parse(text, n).unwrap()
    }

    const RASTRIGIN: &str = "20 + x1^2 + x2^2 - 10*(cos(2*pi*x1) + cos(2*pi*x2))";

    #[test]
    fn hessian_bounds_examples() {
        let any = BoxRegion::cube(-3.0, 1.5, 2).unwrap();
        let h = hessian_interval_bounds(&obj("x1^2 + x2^2", 2), &any, 0.0).unwrap();
        assert_eq!(h.get(0, 0), Interval::point(2.0));
        assert_eq!(h.get(1, 1), Interval::point(2.0));
        assert_eq!(h.get(0, 1), Interval::point(0.0));

        let full = BoxRegion::cube(-5.12, 5.12, 2).unwrap();
        let h = hessian_interval_bounds(&obj(RASTRIGIN, 2), &full, 0.0).unwrap();
        let c = 40.0 * PI * PI;
        for i in 0..2 {
            assert!((h.get(i, i).lo() - (2.0 - c)).abs() < 1e-10);
            assert!((h.get(i, i).hi() - (2.0 + c)).abs() < 1e-10);
        }
        assert_eq!(h.get(0, 1), Interval::point(0.0));

        let h = hessian_interval_bounds(&obj("x1*x2", 2), &any, 0.0).unwrap();
        assert_eq!(h.get(0, 1), Interval::point(1.0));
        assert_eq!(h.get(1, 0), Interval::point(1.0));
    }

    #[test]
    fn lambda_tilde_examples() {
        let diag2 = HessianBounds::from_upper(2, |i, j| Interval::point(if i == j { 2.0 } else { 0.0 }));
        assert_eq!(lambda_tilde(&diag2), 2.0);

        let full = BoxRegion::cube(-5.12, 5.12, 2).unwrap();
        let h = hessian_interval_bounds(&obj(RASTRIGIN, 2), &full, 0.0).unwrap();
        let expected = 2.0 - 40.0 * PI * PI;
        assert!((lambda_tilde(&h) - expected).abs() < 1e-10);
        assert!((expected + 392.78).abs() < 0.01);

        let m = HessianBounds::from_upper(2, |i, j| {
            if i == j {
                Interval::new(4.0, 6.0).unwrap()
            } else {
                Interval::new(-1.0, 2.0).unwrap()
            }
        });
        assert_eq!(lambda_tilde(&m), 2.0);
    }

    #[test]
    fn alpha_examples() {
        let unit = BoxRegion::cube(0.0, 1.0, 2).unwrap();
        let c = certify(&obj("x1^2 + x2^2", 2), &unit, 0.0).unwrap();
        assert_eq!(c.alpha, vec![0.0, 0.0]);
        assert!(c.is_convex());

        let c = certify(&obj("-x1^2 - x2^2", 2), &unit, 0.0).unwrap();
        assert_eq!(c.lambda_tilde, -2.0);
        assert_eq!(c.alpha, vec![1.0, 1.0]);

        let full = BoxRegion::cube(-5.12, 5.12, 2).unwrap();
        let c = certify(&obj(RASTRIGIN, 2), &full, 0.0).unwrap();
        let expected = 20.0 * PI * PI - 1.0;
        for a in &c.alpha {
            assert!((a - expected).abs() < 1e-10);
        }
        assert!((expected - 196.39).abs() < 0.01);
    }

    #[test]
    fn alpha_uses_width_ratios_off_the_diagonal() {
        // H = [[-2, 1], [1, -2]] on [0,2]x[0,1]:
        // alpha_1 = -1/2 (-2 - 1*1/2) = 1.25, alpha_2 = -1/2 (-2 - 1*2/1) = 2
        let f = obj("-x1^2 - x2^2 + x1*x2", 2);
        let bx = BoxRegion::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let c = certify(&f, &bx, 0.0).unwrap();
        assert_eq!(c.lambda_tilde, -3.0);
        assert_eq!(c.alpha, vec![1.25, 2.0]);
    }

    #[test]
    fn degenerate_dimension_gets_zero_alpha() {
        let f = obj("-x1^2 - x2^2 + x1*x2", 2);
        let bx = BoxRegion::new(vec![0.0, 0.5], vec![2.0, 0.5]).unwrap();
        let c = certify(&f, &bx, 0.0).unwrap();
        assert_eq!(c.alpha, vec![1.0, 0.0]);
    }

    #[test]
    fn relaxed_value_and_gradient_examples() {
        let zero = obj("0*x1 + 0*x2", 2);
        let unit = BoxRegion::cube(0.0, 1.0, 2).unwrap();
        assert_eq!(relaxed_value(&zero, &unit, &[1.0, 1.0], &[0.5, 0.5]).unwrap(), -0.5);

        let f = obj(RASTRIGIN, 2);
        let x = [0.3, 0.8];
        assert_eq!(
            relaxed_value(&f, &unit, &[0.0, 0.0], &x).unwrap(),
            f.value(&x).unwrap()
        );
        assert_eq!(
            relaxed_value(&f, &unit, &[5.0, 9.0], &[0.0, 0.0]).unwrap(),
            f.value(&[0.0, 0.0]).unwrap()
        );

        let zero1 = obj("0*x1", 1);
        let bx = BoxRegion::new(vec![0.0], vec![2.0]).unwrap();
        let mut g = [0.0];
        relaxed_gradient(&zero1, &bx, &[1.0], &[1.0], &mut g).unwrap();
        assert_eq!(g[0], 0.0);
        relaxed_gradient(&zero1, &bx, &[1.0], &[0.0], &mut g).unwrap();
        assert_eq!(g[0], -2.0);

        let mut g = [0.0; 2];
        let mut grad_f = [0.0; 2];
        relaxed_gradient(&f, &unit, &[0.0, 0.0], &x, &mut g).unwrap();
        f.gradient(&x, &mut grad_f).unwrap();
        assert_eq!(g, grad_f);
    }

    #[test]
    fn separation_gap_at_midpoint() {
        let unit = BoxRegion::cube(0.0, 1.0, 2).unwrap();
        let f = obj("x1*x2", 2);
        let alpha = [1.0, 1.0];
        let mid = unit.midpoint();
        let gap = f.value(&mid).unwrap() - relaxed_value(&f, &unit, &alpha, &mid).unwrap();
        assert!((gap - 0.5).abs() < 1e-15);
        assert_eq!(separation_distance(&unit, &alpha), 0.5);
    }
}
