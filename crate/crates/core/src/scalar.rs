//! Floating-point abstraction shared by the kinematic, geometric and
//! reachability code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used throughout the crate: `f32` or `f64`.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Infallible for the provided impls.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    #[inline]
    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        self.max(lo).min(hi)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Tolerance used when comparing scheduled times against a sample clock.
pub(crate) fn time_eps<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(64.0))
}
