//! Real scalar abstraction shared by every numerical routine.
//!
//! All matrix code is written against [`Real`]; `f64` is the working type
//! used by the pipelines and the CLI, `f32` is supported for the algebraic
//! layers at correspondingly looser tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar usable by the eigensolvers and the bound engine.
pub trait Real:
    Float
    + FloatConst
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
    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal out of range for scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer out of range for scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar built on a [`Real`].
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cplx<T> {
    Complex::new(x, T::zero())
}

/// Relative closeness with an absolute floor, used by tests and verification passes.
pub fn approx_eq_rel(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    let diff = (a - b).abs();
    diff <= abs || diff <= rel * a.abs().max(b.abs())
}
