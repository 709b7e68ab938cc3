//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Error function.
    fn erf(self) -> Self;

    /// Machine-independent "small" used for degeneracy tests at unit scale.
    fn tiny() -> Self;
}

impl Scalar for f32 {
    fn erf(self) -> f32 {
        libm::erff(self)
    }
    fn tiny() -> f32 {
        1e-6
    }
}

impl Scalar for f64 {
    fn erf(self) -> f64 {
        libm::erf(self)
    }
    fn tiny() -> f64 {
        1e-12
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub(crate) fn pi<T: Scalar>() -> T {
    lit(std::f64::consts::PI)
}
