//! Closed real intervals and boxes.
//!
//! Endpoints are computed with ordinary floating-point arithmetic (no directed
//! rounding). Every operation returns a fresh value.

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("invalid interval bounds [{lo}, {hi}]: lower bound exceeds upper bound")]
    Inverted { lo: f64, hi: f64 },
    #[error("interval bounds must be finite, got [{lo}, {hi}]")]
    NonFinite { lo: f64, hi: f64 },
    #[error("division by interval [{lo}, {hi}] containing zero")]
    DivisionByIntervalContainingZero { lo: f64, hi: f64 },
    #[error("domain error: {op} of [{lo}, {hi}]")]
    Domain { op: &'static str, lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("interval vector must have at least one component")]
    Empty,
}

/// Unary elementary functions with interval extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Elementary {
    Neg,
    Sin,
    Cos,
    Sqrt,
    Exp,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Neg => "neg",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Sqrt => "sqrt",
            Elementary::Exp => "exp",
        }
    }

    /// Real-valued evaluation. `sqrt` of a negative number is a domain error.
    pub fn apply_real<S: Scalar>(self, x: S) -> Result<S, IntervalError> {
        Ok(match self {
            Elementary::Neg => -x,
            Elementary::Sin => x.sin(),
            Elementary::Cos => x.cos(),
            Elementary::Exp => x.exp(),
            Elementary::Sqrt => {
                if x < S::zero() {
                    return Err(IntervalError::Domain {
                        op: "sqrt",
                        lo: x.as_f64(),
                        hi: x.as_f64(),
                    });
                }
                x.sqrt()
            }
        })
    }
}

/// A nonempty closed interval `[lo, hi]`.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval<S> {
    lo: S,
    hi: S,
}

impl<S: Scalar> Interval<S> {
    /// Checked constructor: requires finite endpoints with `lo <= hi`.
    pub fn new(lo: S, hi: S) -> Result<Self, IntervalError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(IntervalError::NonFinite {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        if lo > hi {
            return Err(IntervalError::Inverted {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        Ok(Self { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    #[inline]
    pub fn point(x: S) -> Self {
        Self { lo: x, hi: x }
    }

    /// Interval spanning two values in either order.
    #[inline]
    pub fn hull_of(a: S, b: S) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    /// Internal constructor for results of arithmetic on valid operands.
    #[inline]
    pub(crate) fn raw(lo: S, hi: S) -> Self {
        debug_assert!(!(lo > hi), "inverted interval result");
        Self { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> S {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> S {
        self.hi
    }

    #[inline]
    pub fn width(&self) -> S {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> S {
        (self.lo + self.hi) / S::lit(2.0)
    }

    #[inline]
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    #[inline]
    pub fn contains(&self, x: S) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_zero(&self) -> bool {
        self.contains(S::zero())
    }

    #[inline]
    pub fn subset_of(&self, other: &Self) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Smallest interval containing both operands.
    pub fn hull(&self, other: &Self) -> Self {
        Self::raw(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn add(self, rhs: Self) -> Self {
        Self::raw(self.lo + rhs.lo, self.hi + rhs.hi)
    }

    pub fn sub(self, rhs: Self) -> Self {
        Self::raw(self.lo - rhs.hi, self.hi - rhs.lo)
    }

    pub fn mul(self, rhs: Self) -> Self {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = p.iter().copied().fold(S::infinity(), S::min);
        let hi = p.iter().copied().fold(S::neg_infinity(), S::max);
        Self::raw(lo, hi)
    }

    pub fn scale(self, a: S) -> Self {
        if a >= S::zero() {
            Self::raw(a * self.lo, a * self.hi)
        } else {
            Self::raw(a * self.hi, a * self.lo)
        }
    }

    pub fn div(self, rhs: Self) -> Result<Self, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByIntervalContainingZero {
                lo: rhs.lo.as_f64(),
                hi: rhs.hi.as_f64(),
            });
        }
        let recip = Self::raw(S::one() / rhs.hi, S::one() / rhs.lo);
        Ok(self.mul(recip))
    }

    pub fn neg(self) -> Self {
        Self::raw(-self.hi, -self.lo)
    }

    pub fn exp(self) -> Self {
        Self::raw(self.lo.exp(), self.hi.exp())
    }

    pub fn sqrt(self) -> Result<Self, IntervalError> {
        if self.lo < S::zero() {
            return Err(IntervalError::Domain {
                op: "sqrt",
                lo: self.lo.as_f64(),
                hi: self.hi.as_f64(),
            });
        }
        Ok(Self::raw(self.lo.sqrt(), self.hi.sqrt()))
    }

    pub fn sin(self) -> Self {
        self.trig(S::sin, 1)
    }

    pub fn cos(self) -> Self {
        self.trig(S::cos, 0)
    }

    /// Range of sin/cos by enumerating critical points `k * pi/2` inside the
    /// interval. For sin the extrema sit at odd `k` (`k = 1 mod 4` is a
    /// maximum); for cos at even `k` (`k = 0 mod 4` is a maximum).
    fn trig(self, f: fn(S) -> S, max_residue: i64) -> Self {
        let two_pi = S::TAU();
        if self.width() >= two_pi {
            return Self::raw(-S::one(), S::one());
        }
        let a = f(self.lo);
        let b = f(self.hi);
        let mut lo = a.min(b);
        let mut hi = a.max(b);
        let half_pi = S::FRAC_PI_2();
        let k_first = (self.lo / half_pi).ceil();
        let k_last = (self.hi / half_pi).floor();
        let mut k = k_first;
        while k <= k_last {
            let residue = k.to_i64().map_or(0, |k| k.rem_euclid(4));
            if residue == max_residue {
                hi = S::one();
            } else if residue == (max_residue + 2) % 4 {
                lo = -S::one();
            }
            k += S::one();
        }
        Self::raw(lo.max(-S::one()), hi.min(S::one()))
    }

    pub fn elementary(self, op: Elementary) -> Result<Self, IntervalError> {
        Ok(match op {
            Elementary::Neg => self.neg(),
            Elementary::Sin => self.sin(),
            Elementary::Cos => self.cos(),
            Elementary::Sqrt => self.sqrt()?,
            Elementary::Exp => self.exp(),
        })
    }
}

impl<S: Scalar> Add for Interval<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Interval::add(self, rhs)
    }
}

impl<S: Scalar> Sub for Interval<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Interval::sub(self, rhs)
    }
}

impl<S: Scalar> Mul for Interval<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Interval::mul(self, rhs)
    }
}

impl<S: Scalar> Neg for Interval<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Interval::neg(self)
    }
}

impl<S: fmt::Debug> fmt::Debug for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl<S: fmt::Display> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Exact range of `z -> a^T z` over the box `z`, computed componentwise:
/// `a_i >= 0` contributes `[a_i z_i^L, a_i z_i^U]`, otherwise
/// `[a_i z_i^U, a_i z_i^L]`.
pub fn linear_natural_extension<S: Scalar>(
    a: &[S],
    z: &[Interval<S>],
) -> Result<Interval<S>, IntervalError> {
    if a.len() != z.len() {
        return Err(IntervalError::DimensionMismatch {
            expected: a.len(),
            found: z.len(),
        });
    }
    Ok(linear_extension_unchecked(a, z))
}

#[inline]
pub(crate) fn linear_extension_unchecked<S: Scalar>(a: &[S], z: &[Interval<S>]) -> Interval<S> {
    let mut lo = S::zero();
    let mut hi = S::zero();
    for (&ai, zi) in a.iter().zip(z) {
        if ai >= S::zero() {
            lo += ai * zi.lo;
            hi += ai * zi.hi;
        } else {
            lo += ai * zi.hi;
            hi += ai * zi.lo;
        }
    }
    Interval::raw(lo, hi)
}

/// A box: an ordered, nonempty list of intervals.
#[derive(Clone, PartialEq)]
pub struct IntervalVector<S> {
    components: Vec<Interval<S>>,
}

impl<S: Scalar> IntervalVector<S> {
    pub fn new(components: Vec<Interval<S>>) -> Result<Self, IntervalError> {
        if components.is_empty() {
            return Err(IntervalError::Empty);
        }
        Ok(Self { components })
    }

    /// Box `[lower, upper]` from endpoint vectors; each pair is validated.
    pub fn from_bounds(lower: &[S], upper: &[S]) -> Result<Self, IntervalError> {
        if lower.len() != upper.len() {
            return Err(IntervalError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        let components = lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| Interval::new(l, u))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(components)
    }

    pub fn point(x: &[S]) -> Result<Self, IntervalError> {
        Self::from_bounds(x, x)
    }

    pub(crate) fn from_vec_unchecked(components: Vec<Interval<S>>) -> Self {
        debug_assert!(!components.is_empty());
        Self { components }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn lower(&self) -> Vec<S> {
        self.components.iter().map(Interval::lo).collect()
    }

    pub fn upper(&self) -> Vec<S> {
        self.components.iter().map(Interval::hi).collect()
    }

    pub fn widths(&self) -> Vec<S> {
        self.components.iter().map(Interval::width).collect()
    }

    pub fn contains(&self, x: &[S]) -> bool {
        x.len() == self.dim() && self.components.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| a.subset_of(b))
    }

    pub fn as_slice(&self) -> &[Interval<S>] {
        &self.components
    }

    pub fn into_vec(self) -> Vec<Interval<S>> {
        self.components
    }
}

impl<S> Deref for IntervalVector<S> {
    type Target = [Interval<S>];
    fn deref(&self) -> &[Interval<S>] {
        &self.components
    }
}

impl<S: fmt::Debug> fmt::Debug for IntervalVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.components).finish()
    }
}
