//! Scalar abstraction. Everything numeric is generic over [`Real`] so the
//! same code runs in `f32` or `f64`; the crate root re-exports `f64` aliases.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Max-entry tolerance on `|M†M − I|` when validating unitaries.
    const UNITARY_TOL: f64;
    /// Tolerance on state norms.
    const NORM_TOL: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f64 {
    const UNITARY_TOL: f64 = 1e-10;
    const NORM_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const UNITARY_TOL: f64 = 2e-5;
    const NORM_TOL: f64 = 2e-5;
}

pub type C<R> = Complex<R>;

#[inline]
pub fn c<R: Real>(re: f64, im: f64) -> C<R> {
    Complex::new(R::lit(re), R::lit(im))
}

#[inline]
pub fn czero<R: Real>() -> C<R> {
    Complex::new(R::zero(), R::zero())
}

#[inline]
pub fn cone<R: Real>() -> C<R> {
    Complex::new(R::one(), R::zero())
}

/// `e^{iθ}`.
#[inline]
pub fn cis<R: Real>(theta: R) -> C<R> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn norm_sqr<R: Real>(z: C<R>) -> R {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn modulus<R: Real>(z: C<R>) -> R {
    norm_sqr(z).sqrt()
}

#[inline]
pub fn arg<R: Real>(z: C<R>) -> R {
    z.im.atan2(z.re)
}

/// `√max(x, 0)`, clamped above at 1. Used for every `√(1 − …)` distance.
#[inline]
pub fn sqrt_unit<R: Real>(x: R) -> R {
    if x <= R::zero() {
        R::zero()
    } else if x >= R::one() {
        R::one()
    } else {
        x.sqrt()
    }
}
