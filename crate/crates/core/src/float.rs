//! The scalar abstraction used throughout the crate.
//!
//! All core numerics are generic over [`Real`], which bundles the
//! `num-traits` float machinery with the bounds needed by `rustfft` and
//! `rayon`. Double precision is the intended work horse (the verification
//! tolerances assume it); `f32` is supported for quick smoke runs.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + FftNum
    + Send
    + Sync
    + 'static
{
    /// Shorthand for converting a literal; panics only if the literal is
    /// not representable, which cannot happen for finite `f64` inputs.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal out of range")
    }

    /// Lossy view as `f64`, used for reporting and formatting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Cplx<T> = Complex<T>;

/// `i` as a complex constant.
pub fn imag_unit<T: Real>() -> Cplx<T> {
    Complex::new(T::zero(), T::one())
}
