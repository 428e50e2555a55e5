//! Low-discrepancy (Weyl/Kronecker) sequences for deterministic sampling.
//!
//! Used wherever a declared bound is validated by a sampled supremum: the
//! sequence is reproducible without carrying an RNG seed around.

use crate::scalar::{r, Real};
use num_complex::Complex;

/// Additive Weyl sequence in the unit cube of dimension `DIM`.
///
/// Increments are fractional parts of square roots of distinct primes,
/// which are independent irrationals, so the sequence equidistributes.
pub struct Weyl<const DIM: usize> {
    state: [f64; DIM],
    step: [f64; DIM],
}

const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];

impl<const DIM: usize> Weyl<DIM> {
    pub fn new() -> Self {
        assert!(DIM <= PRIMES.len());
        let mut step = [0.0; DIM];
        for (i, s) in step.iter_mut().enumerate() {
            *s = PRIMES[i].sqrt().fract();
        }
        Weyl {
            state: [0.5; DIM],
            step,
        }
    }

    pub fn next_point(&mut self) -> [f64; DIM] {
        for i in 0..DIM {
            self.state[i] = (self.state[i] + self.step[i]).fract();
        }
        self.state
    }
}

impl<const DIM: usize> Default for Weyl<DIM> {
    fn default() -> Self {
        Self::new()
    }
}

/// Quasi-uniform points on the unit sphere of ℂ³ (unit homogeneous lifts).
///
/// Maps a 6-dimensional Weyl point through the Box–Muller transform and
/// normalizes, which equidistributes on the sphere.
pub fn unit_lifts<T: Real>(count: usize) -> Vec<[Complex<T>; 3]> {
    let mut weyl = Weyl::<6>::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = weyl.next_point();
        let mut g = [0.0f64; 6];
        for k in 0..3 {
            let (u1, u2) = (u[2 * k].max(1e-12), u[2 * k + 1]);
            let rad = (-2.0 * u1.ln()).sqrt();
            g[2 * k] = rad * (2.0 * std::f64::consts::PI * u2).cos();
            g[2 * k + 1] = rad * (2.0 * std::f64::consts::PI * u2).sin();
        }
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        out.push([
            Complex::new(r::<T>(g[0] / norm), r(g[1] / norm)),
            Complex::new(r(g[2] / norm), r(g[3] / norm)),
            Complex::new(r(g[4] / norm), r(g[5] / norm)),
        ]);
    }
    out
}

/// Quasi-uniform points of the real 4-ball of radius `radius` in ℂ²,
/// produced by rejection from the enclosing cube.
pub fn ball_points_c2<T: Real>(radius: T, count: usize) -> Vec<(Complex<T>, Complex<T>)> {
    let rad: f64 = radius.to_f64().unwrap();
    let mut weyl = Weyl::<4>::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = weyl.next_point();
        let p: Vec<f64> = u.iter().map(|x| (2.0 * x - 1.0) * rad).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= rad * rad {
            out.push((
                Complex::new(r::<T>(p[0]), r(p[1])),
                Complex::new(r(p[2]), r(p[3])),
            ));
        }
    }
    out
}

/// Golden-angle sunflower layout: `count` quasi-uniform nodes on the disc
/// of the given center and radius.
pub fn sunflower_disc<T: Real>(center: Complex<T>, radius: T, count: usize) -> Vec<Complex<T>> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let n = count as f64;
    (0..count)
        .map(|k| {
            let rho = ((k as f64 + 0.5) / n).sqrt();
            let theta = golden_angle * k as f64;
            center
                + Complex::new(
                    r::<T>(rho * theta.cos()),
                    r::<T>(rho * theta.sin()),
                ) * radius
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weyl_equidistributes_roughly() {
        let mut w = Weyl::<2>::new();
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| w.next_point()[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn unit_lifts_are_unit() {
        for lift in unit_lifts::<f64>(100) {
            let n: f64 = lift.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sunflower_stays_in_disc() {
        let center = Complex::new(1.0f64, -2.0);
        for p in sunflower_disc(center, 3.0, 400) {
            assert!((p - center).norm() <= 3.0 + 1e-12);
        }
    }
}
