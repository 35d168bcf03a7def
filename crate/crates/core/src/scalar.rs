//! Floating-point scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the core math is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub(crate) fn lit<S: Scalar>(x: f64) -> S {
    S::lit(x)
}

/// Relative error `|a - b| / max(|a|, |b|, 1e-300)`.
pub fn rel_err<S: Scalar>(a: S, b: S) -> S {
    let floor = S::from_f64(1e-300).filter(|v| *v > S::zero()).unwrap_or_else(S::min_positive_value);
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
