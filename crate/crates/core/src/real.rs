//! Scalar abstraction for all numeric kernels.
//!
//! Everything that manipulates magnitudes is generic over [`Real`], a small
//! extension of [`num_traits::Float`]. `f64` is the working type (the crate
//! root aliases use it); `f32` is supported for experimentation but its
//! exponent range exhausts around knot index 38 of the default profile.

use std::fmt;
use std::num::ParseFloatError;
use std::str::FromStr;

use num_traits::{Float, FloatConst};

/// Floating-point scalar usable by every kernel in this crate.
pub trait Real:
    Float
    + FloatConst
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + FromStr<Err = ParseFloatError>
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` constant into `T`. Panics only if `T` cannot represent
/// any value near `x`, which cannot happen for the constants used internally.
pub(crate) fn cast<T: Real>(x: f64) -> T {
    T::from(x).expect("constant not representable in scalar type")
}

/// Largest magnitude treated as "plain scale": beyond it, coordinates are no
/// longer materialised and computation switches to log form. Chosen a few
/// orders of magnitude below `T::max_value()` so that sums of a handful of
/// plain-scale terms cannot overflow.
pub(crate) fn plain_limit<T: Real>() -> T {
    T::max_value() * cast::<T>(1e-8)
}
