//! Closed real intervals and the natural interval extension of an expression.
//!
//! Arithmetic is plain round-to-nearest; no outward rounding is applied. The
//! enclosures are tight for `+ - * neg`, monotone functions and even powers,
//! and for `sin`/`cos` by locating interior extrema.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::expression::{BinOp, Expression, Func, Op};
use crate::geometry::BoxRegion;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Largest absolute value attained, `max(|lo|, |hi|)`.
    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Widens both ends by `slack * (1 + |end|)`.
    pub fn widen(self, slack: f64) -> Self {
        if slack == 0.0 {
            return self;
        }
        Self {
            lo: self.lo - slack * (1.0 + self.lo.abs()),
            hi: self.hi + slack * (1.0 + self.hi.abs()),
        }
    }

    fn checked(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi)
    }

    pub fn div(self, rhs: Interval) -> Result<Interval> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(Error::ZeroInDenominator);
        }
        let q = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        Self::checked(min4(q), max4(q))
    }

    pub fn exp(self) -> Result<Interval> {
        Self::checked(self.lo.exp(), self.hi.exp())
    }

    pub fn ln(self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::Domain(format!(
                "ln over [{}, {}] reaches non-positive values",
                self.lo, self.hi
            )));
        }
        Self::checked(self.lo.ln(), self.hi.ln())
    }

    pub fn sin(self) -> Interval {
        self.periodic(f64::sin, FRAC_PI_2, -FRAC_PI_2)
    }

    pub fn cos(self) -> Interval {
        self.periodic(f64::cos, 0.0, PI)
    }

    // Range of a 2pi-periodic unit-amplitude function whose maxima sit at
    // `max_at + 2k pi` and minima at `min_at + 2k pi`.
    fn periodic(self, f: fn(f64) -> f64, max_at: f64, min_at: f64) -> Interval {
        if self.hi - self.lo >= TAU {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let (a, b) = (f(self.lo), f(self.hi));
        let hits = |phase: f64| {
            let k = ((self.lo - phase) / TAU).ceil();
            phase + k * TAU <= self.hi
        };
        Interval {
            lo: if hits(min_at) { -1.0 } else { a.min(b) },
            hi: if hits(max_at) { 1.0 } else { a.max(b) },
        }
    }

    pub fn powi(self, k: u32) -> Result<Interval> {
        if k == 0 {
            return Ok(Interval::point(1.0));
        }
        let e = k as i32;
        let (a, b) = (self.lo.powi(e), self.hi.powi(e));
        if k % 2 == 1 || self.lo >= 0.0 {
            Self::checked(a, b)
        } else if self.hi <= 0.0 {
            Self::checked(b, a)
        } else {
            Self::checked(0.0, a.max(b))
        }
    }
}

fn min4(v: [f64; 4]) -> f64 {
    v[0].min(v[1]).min(v[2].min(v[3]))
}

fn max4(v: [f64; 4]) -> f64 {
    v[0].max(v[1]).max(v[2].max(v[3]))
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        Interval {
            lo: min4(p),
            hi: max4(p),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Natural interval extension of `expr` over `region`.
pub fn interval_evaluate(expr: &Expression, region: &BoxRegion) -> Result<Interval> {
    if region.dimension() != expr.dimension() {
        return Err(Error::DimensionMismatch {
            expected: expr.dimension(),
            actual: region.dimension(),
        });
    }
    let (lower, upper) = (region.lower(), region.upper());
    let mut stack: Vec<Interval> = Vec::with_capacity(16);
    for op in expr.tape() {
        let value = match *op {
            Op::Const(c) => Interval::point(c),
            Op::Var(i) => Interval {
                lo: lower[i],
                hi: upper[i],
            },
            Op::Neg => -stack.pop().unwrap(),
            Op::Call(f) => {
                let a = stack.pop().unwrap();
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp()?,
                    Func::Ln => a.ln()?,
                }
            }
            Op::Binary(op) => {
                let b = stack.pop().unwrap();
                let a = stack.pop().unwrap();
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.div(b)?,
                }
            }
            Op::Pow(k) => stack.pop().unwrap().powi(k)?,
        };
        if !value.lo.is_finite() || !value.hi.is_finite() {
            return Err(Error::InvalidInterval {
                lo: value.lo,
                hi: value.hi,
            });
        }
        stack.push(value);
    }
    Ok(stack.pop().unwrap())
}
