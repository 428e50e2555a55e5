//! Projective plane primitives: normalized lifts, the chordal metric, and
//! the three affine charts.
//!
//! Lifts are kept at unit Euclidean norm so `log ‖Z‖ = 0` and the round
//! Fubini–Study potential vanishes on stored points. Normalization fixes
//! the scale only; the phase is kept, and projective equality is always
//! tested through the chordal distance, never componentwise.

use crate::error::{Error, Result};
use crate::scalar::{fmax, r, Real};
use num_complex::Complex;

/// A point of ℙ²(ℂ) held as a unit-norm homogeneous lift in ℂ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint<T: Real> {
    lift: [Complex<T>; 3],
}

/// Modulus threshold under which a chart is declared singular at a point.
/// Every unit lift has a coordinate of modulus ≥ 1/√3, so some chart
/// always applies.
fn chart_threshold<T: Real>() -> T {
    num_traits::Float::sqrt(r::<T>(1.0 / 3.0)) - r::<T>(1e-9)
}

pub(crate) fn lift_norm<T: Real>(lift: &[Complex<T>; 3]) -> T {
    num_traits::Float::sqrt(lift.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b))
}

impl<T: Real> ProjPoint<T> {
    /// Normalize an arbitrary nonzero lift to unit Euclidean norm.
    ///
    /// The result is a positive real multiple of the input, so the phase
    /// of each coordinate is preserved.
    pub fn normalize(lift: [Complex<T>; 3]) -> Result<Self> {
        let finite = lift
            .iter()
            .all(|z| num_traits::Float::is_finite(z.re) && num_traits::Float::is_finite(z.im));
        if !finite {
            return Err(Error::ZeroVector);
        }
        let norm = lift_norm(&lift);
        if norm == T::zero() {
            return Err(Error::ZeroVector);
        }
        let inv = T::one() / norm;
        Ok(ProjPoint {
            lift: [lift[0] * inv, lift[1] * inv, lift[2] * inv],
        })
    }

    /// Build from affine coordinates in the chart `t = 1`.
    pub fn from_affine(z: Complex<T>, w: Complex<T>) -> Self {
        Self::normalize([z, w, Complex::new(T::one(), T::zero())])
            .expect("affine lift is never zero")
    }

    pub fn lift(&self) -> &[Complex<T>; 3] {
        &self.lift
    }

    /// Index of the largest-modulus homogeneous coordinate.
    pub fn dominant_coordinate(&self) -> usize {
        let mut best = 0;
        for i in 1..3 {
            if self.lift[i].norm_sqr() > self.lift[best].norm_sqr() {
                best = i;
            }
        }
        best
    }

    /// The chart with the largest chart coordinate at this point.
    pub fn best_chart(&self) -> AffineChart {
        AffineChart::new(self.dominant_coordinate())
    }
}

/// Chordal distance ‖p ∧ q‖ / (‖p‖·‖q‖) between projective points.
///
/// Lifts are unit by construction so only the wedge norm is computed. The
/// value lies in [0, 1], is symmetric, and vanishes exactly on equal
/// projective points.
pub fn chordal_distance<T: Real>(p: &ProjPoint<T>, q: &ProjPoint<T>) -> T {
    let a = p.lift;
    let b = q.lift;
    let m01 = a[0] * b[1] - a[1] * b[0];
    let m02 = a[0] * b[2] - a[2] * b[0];
    let m12 = a[1] * b[2] - a[2] * b[1];
    let s = m01.norm_sqr() + m02.norm_sqr() + m12.norm_sqr();
    fmax(T::zero(), crate::scalar::fmin(T::one(), num_traits::Float::sqrt(s)))
}

/// One of the three dehomogenization charts of ℙ².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineChart {
    index: usize,
}

impl AffineChart {
    pub fn new(index: usize) -> Self {
        assert!(index < 3, "chart index must be 0, 1 or 2");
        AffineChart { index }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// The two coordinate indices kept by this chart, in increasing order.
    pub fn kept(&self) -> (usize, usize) {
        match self.index {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    /// Whether the chart applies at `p` (chart coordinate above 1/√3 − 1e-9).
    pub fn applies<T: Real>(&self, p: &ProjPoint<T>) -> bool {
        p.lift[self.index].norm() > chart_threshold::<T>()
    }

    fn check<T: Real>(&self, p: &ProjPoint<T>) -> Result<()> {
        if self.applies(p) {
            Ok(())
        } else {
            Err(Error::ChartSingular {
                chart: self.index,
                modulus: p.lift[self.index].norm().to_f64().unwrap_or(0.0),
            })
        }
    }
}

/// Dehomogenize `p` in the given chart.
pub fn to_chart<T: Real>(p: &ProjPoint<T>, chart: AffineChart) -> Result<(Complex<T>, Complex<T>)> {
    chart.check(p)?;
    let (a, b) = chart.kept();
    let pivot = p.lift[chart.index];
    Ok((p.lift[a] / pivot, p.lift[b] / pivot))
}

/// Inverse of [`to_chart`]: rebuild the projective point from chart
/// coordinates.
pub fn from_chart<T: Real>(coords: (Complex<T>, Complex<T>), chart: AffineChart) -> ProjPoint<T> {
    let (a, b) = chart.kept();
    let mut lift = [Complex::new(T::zero(), T::zero()); 3];
    lift[chart.index] = Complex::new(T::one(), T::zero());
    lift[a] = coords.0;
    lift[b] = coords.1;
    ProjPoint::normalize(lift).expect("chart lift has a unit coordinate")
}
