//! Axis-aligned boxes and the bisection rules used by the branch-and-bound loop.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The box `[lower, upper]` in R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxFields")]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Unvalidated form read from JSON.
#[derive(Deserialize)]
struct BoxFields {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<BoxFields> for BoxRegion {
    type Error = Error;

    fn try_from(f: BoxFields) -> Result<Self> {
        Self::new(f.lower, f.upper)
    }
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidBox("zero-dimensional box".into()));
        }
        for (i, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidBox(format!("non-finite bound in dimension {}", i + 1)));
            }
            if a > b {
                return Err(Error::InvalidBox(format!(
                    "lower bound {a} exceeds upper bound {b} in dimension {}",
                    i + 1
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    /// Degenerate box holding a single point.
    pub fn point(x: &[f64]) -> Result<Self> {
        Self::new(x.to_vec(), x.to_vec())
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dimension()).map(|i| self.width(i)).collect()
    }

    pub fn max_width(&self) -> f64 {
        (0..self.dimension()).map(|i| self.width(i)).fold(0.0, f64::max)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        (0..self.dimension()).map(|i| self.width(i)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_slack(x, 0.0)
    }

    pub fn contains_with_slack(&self, x: &[f64], slack: f64) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *v >= a - slack && *v <= b + slack)
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        other.dimension() == self.dimension()
            && (0..self.dimension())
                .all(|i| other.lower[i] >= self.lower[i] && other.upper[i] <= self.upper[i])
    }

    /// Component-wise projection onto the box.
    pub fn project(&self, x: &mut [f64]) {
        for ((v, a), b) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*a, *b);
        }
    }

    /// All 2^n corners, in binary counting order over the dimensions.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { self.upper[i] } else { self.lower[i] })
                    .collect()
            })
            .collect()
    }

    /// Smallest index attaining the maximum width (zero-based).
    pub fn branching_index(&self) -> Result<usize> {
        let mut best = 0;
        let mut best_width = self.width(0);
        for i in 1..self.dimension() {
            let w = self.width(i);
            if w > best_width {
                best = i;
                best_width = w;
            }
        }
        if best_width <= 0.0 {
            return Err(Error::DegenerateBox);
        }
        Ok(best)
    }

    /// Bisects at the midpoint of the branching direction.
    pub fn split(&self) -> Result<(BoxRegion, BoxRegion)> {
        let l = self.branching_index()?;
        let mid = 0.5 * (self.lower[l] + self.upper[l]);
        let mut left = self.clone();
        let mut right = self.clone();
        left.upper[l] = mid;
        right.lower[l] = mid;
        Ok((left, right))
    }

    /// `sum_i alpha_i ((b_i - a_i) / 2)^2`, which is also the largest gap
    /// between an objective and its relaxation on this box.
    pub fn modified_width(&self, alpha: &[f64]) -> Result<f64> {
        if alpha.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: alpha.len(),
            });
        }
        Ok(alpha
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let h = 0.5 * self.width(i);
                a * h * h
            })
            .sum())
    }
}

impl fmt::Display for BoxRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.lower.iter().zip(&self.upper).enumerate() {
            if i > 0 {
                write!(f, "x")?;
            }
            write!(f, "[{a},{b}]")?;
        }
        Ok(())
    }
}

impl FromStr for BoxRegion {
    type Err = Error;

    /// Parses `[a1,b1]x[a2,b2]x...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidBox(format!("{msg} in `{s}`"));
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut rest = s.trim();
        loop {
            rest = rest
                .strip_prefix('[')
                .ok_or_else(|| bad("expected `[`"))?;
            let close = rest.find(']').ok_or_else(|| bad("missing `]`"))?;
            let (a, b) = rest[..close]
                .split_once(',')
                .ok_or_else(|| bad("expected `lo,hi`"))?;
            let a: f64 = a.trim().parse().map_err(|_| bad("malformed lower bound"))?;
            let b: f64 = b.trim().parse().map_err(|_| bad("malformed upper bound"))?;
            lower.push(a);
            upper.push(b);
            rest = rest[close + 1..].trim_start();
            if rest.is_empty() {
                break;
            }
            rest = rest
                .strip_prefix('x')
                .ok_or_else(|| bad("expected `x` between factors"))?
                .trim_start();
        }
        BoxRegion::new(lower, upper)
    }
}
