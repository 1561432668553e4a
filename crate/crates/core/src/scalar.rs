//! Scalar abstraction: every numeric routine in this crate is generic over
//! the floating-point type, so the same kernels run in `f32` or `f64`.

use std::fmt;
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used by the fog models.
pub trait Real:
    Float + FromPrimitive + AddAssign + Sum<Self> + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + AddAssign
        + Sum<Self>
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Lifts an `f64` constant into the working scalar type.
pub(crate) fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in scalar type")
}
