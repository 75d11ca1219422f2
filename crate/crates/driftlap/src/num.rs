//! Scalar abstraction for the whole crate.
//!
//! Everything numeric is generic over [`Real`], which is `f32` or `f64`.
//! Concrete aliases for the common `f64` instantiation live at the crate
//! root.

use crate::linalg::dense::DenseEigh;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + DenseEigh
    + std::fmt::Debug
    + std::fmt::Display
    + std::fmt::LowerExp
    + std::str::FromStr<Err = std::num::ParseFloatError>
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for pulling `f64` literals (tolerances, factors) into `T`.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must be representable in the scalar type")
}

/// `usize` counter into `T`, for averages and quadrature weights.
#[inline]
pub fn real_from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count must be representable in the scalar type")
}
