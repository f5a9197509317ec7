//! Scalar abstraction for the numeric kernel.
//!
//! Everything numeric in this crate is generic over a real floating-point
//! type; complex arithmetic is `num_complex::Complex<T>` on top of it.
//! `f64` is the type the CLI and the acceptance tolerances are written for;
//! `f32` works for the algebraic paths but cannot meet the default
//! validation tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the library is generic over.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Convert an `f64` constant (tolerances, literals) into `Self`.
    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant conversion")
    }

    /// Convert a count into `Self`.
    #[inline]
    fn from_count(v: usize) -> Self {
        Self::from_usize(v).expect("count conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;

#[inline]
pub fn c_zero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn c_one<T: Scalar>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn c_re<T: Scalar>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
