//! The floating-point scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar usable by the estimator: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + FromStr
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion back to `f64`, used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + FromStr
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Median of three values, computed by sorting.
#[inline]
pub fn median3<S: Scalar>(a: S, b: S, c: S) -> S {
    let mut v = [a, b, c];
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    if v[1] > v[2] {
        v.swap(1, 2);
    }
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    v[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_three_all_orders() {
        let perms = [
            (1.0, 2.0, 3.0),
            (1.0, 3.0, 2.0),
            (2.0, 1.0, 3.0),
            (2.0, 3.0, 1.0),
            (3.0, 1.0, 2.0),
            (3.0, 2.0, 1.0),
        ];
        for (a, b, c) in perms {
            assert_eq!(median3::<f64>(a, b, c), 2.0);
        }
        assert_eq!(median3::<f32>(1.0, 1.0, 0.0), 1.0);
    }
}
