//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating-point scalar used throughout the crate (`f32` or `f64`).
pub trait Real: Float + FloatConst + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(value: f64) -> Self {
        <Self as NumCast>::from(value).expect("finite literal representable in scalar type")
    }

    /// Converts a count or length into the scalar type.
    fn from_len(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("length representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Float + FloatConst + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {}

/// Left-to-right sum. Kept explicit so accumulation order never depends on
/// iterator adaptors.
pub(crate) fn sum_ltr<T: Real, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut acc = T::zero();
    for v in values {
        acc = acc + v;
    }
    acc
}
