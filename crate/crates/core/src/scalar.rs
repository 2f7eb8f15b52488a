//! Floating point abstraction shared by the closed-form modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the closed-form computations run in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative tolerance used by solvers when the caller does not pick one.
    fn default_tolerance() -> Self;

    /// Converts an `f64` literal. Every literal used in this crate is exactly
    /// representable or a rounded constant, so the conversion cannot fail.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn default_tolerance() -> Self {
        1e-6
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        1e-14
    }
}

/// True when `value` is zero up to a few ulps of `scale`.
pub(crate) fn negligible<T: Scalar>(value: T, scale: T) -> bool {
    value.abs() <= T::lit(64.0) * T::epsilon() * scale.abs().max(T::one())
}
