//! Scalar abstraction: the core math is generic over the real type.

use num_complex::Complex;

/// Floating-point scalar the whole crate is generic over (`f32` or `f64`).
///
/// `nalgebra::RealField` is required so companion matrices over
/// `Complex<T>` can be fed to the eigenvalue solver.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + nalgebra::RealField
    + Default
    + Copy
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand conversion from an `f64` literal into the generic scalar.
#[inline]
pub fn r<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert into the scalar type")
}

/// Shorthand for a complex number built from `f64` literals.
#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(r(re), r(im))
}

/// `max` with an unambiguous name (both `Float` and `RealField` define one).
#[inline]
pub fn fmax<T: Real>(a: T, b: T) -> T {
    if a > b {
        a
    } else {
        b
    }
}

/// `min` counterpart of [`fmax`].
#[inline]
pub fn fmin<T: Real>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}
