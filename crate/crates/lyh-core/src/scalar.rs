//! Scalar plumbing shared by the generic tensor layer.

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use std::fmt::Debug;

/// Real scalar usable by the generic tensor layer (`f32`, `f64`).
pub trait Real: Float + FloatConst + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from(x).expect("literal representable")
    }
}

impl<T> Real for T where T: Float + FloatConst + Debug + Default + Send + Sync + 'static {}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

/// Double precision complex number.
pub type C64 = Complex<f64>;

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

/// The imaginary unit.
#[inline]
pub fn ci<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

/// `i^k` for any integer `k`.
pub fn i_pow<T: Real>(k: i64) -> Cx<T> {
    match k.rem_euclid(4) {
        0 => cone(),
        1 => ci(),
        2 => -cone::<T>(),
        _ => -ci::<T>(),
    }
}

/// `(-1)^k` as a real scalar.
#[inline]
pub fn sign_pow<T: Real>(k: i64) -> T {
    if k.rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    }
}
