//! Scalar abstraction shared by every real-valued kernel.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the factorisation can run on: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Relative tolerance used for value equality when none is supplied.
    fn default_tolerance() -> Self;

    /// Lossy conversion from `f64`, used for parameters like coefficient bounds.
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn default_tolerance() -> Self {
        1e-5
    }
}

/// `|a - b| <= tol * max(1, |a|)`; `a` is the reference value.
#[inline]
pub fn approx_eq<T: Scalar>(reference: T, other: T, tol: T) -> bool {
    (other - reference).abs() <= tol * reference.abs().max(T::one())
}
