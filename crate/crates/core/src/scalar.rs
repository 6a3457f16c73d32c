use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the spectral code is generic over: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + Debug + Display + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + 'static {}

/// Casts an `f64` constant into the working scalar.
pub(crate) fn cast<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 constant representable in scalar")
}

pub(crate) fn from_count<S: Scalar>(k: usize) -> S {
    S::from_usize(k).expect("count representable in scalar")
}

pub(crate) fn from_int<S: Scalar>(k: i64) -> S {
    S::from_i64(k).expect("integer representable in scalar")
}
