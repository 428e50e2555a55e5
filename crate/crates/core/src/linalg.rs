//! Tiny fixed-size complex linear algebra used by the cocycle machinery.

use crate::scalar::{r, Real};
use num_complex::Complex;

/// Column 2-vector over ℂ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2<T: Real>(pub Complex<T>, pub Complex<T>);

impl<T: Real> Vec2<T> {
    pub fn norm(&self) -> T {
        num_traits::Float::sqrt(self.0.norm_sqr() + self.1.norm_sqr())
    }

    pub fn scale(&self, s: T) -> Self {
        Vec2(self.0 * s, self.1 * s)
    }

    /// Unit vector (1,1)/√2, the deterministic start of the Lyapunov tracker.
    pub fn diagonal_unit() -> Self {
        let h = num_traits::Float::sqrt(r::<T>(0.5));
        Vec2(Complex::new(h, T::zero()), Complex::new(h, T::zero()))
    }
}

/// 2×2 complex matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T: Real> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> Mat2<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn diag(a: Complex<T>, d: Complex<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Mat2 { a, b: z, c: z, d }
    }

    pub fn identity() -> Self {
        let one = Complex::new(T::one(), T::zero());
        Self::diag(one, one)
    }

    pub fn det(&self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, rhs: &Mat2<T>) -> Mat2<T> {
        Mat2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn mul_vec(&self, v: &Vec2<T>) -> Vec2<T> {
        Vec2(self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    pub fn inverse(&self) -> Option<Mat2<T>> {
        let det = self.det();
        if det.norm_sqr() == T::zero() {
            return None;
        }
        let inv = det.inv();
        Some(Mat2 {
            a: self.d * inv,
            b: -self.b * inv,
            c: -self.c * inv,
            d: self.a * inv,
        })
    }

    /// Frobenius norm; an operator-norm surrogate good enough for
    /// relative-error comparisons of 2×2 blocks.
    pub fn frob(&self) -> T {
        num_traits::Float::sqrt(
            self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr(),
        )
    }
}
