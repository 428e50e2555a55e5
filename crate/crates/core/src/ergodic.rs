//! Lyapunov exponents, Bowen-ball entropy, and the Ruelle inequality.
//!
//! The Jacobian cocycle is carried along an orbit in chained affine
//! charts: the destination chart of each step is the source chart of the
//! next, so the matrix product is the derivative of the iterated chart
//! expression. The top exponent tracks the growth of one renormalized
//! vector; the second exponent comes from the determinant identity
//! χ₁ + χ₂ = lim (1/n) Σ log |det A_k|, which is cheap and avoids
//! subspace tracking in the 2×2 case.

use crate::endo::HomogeneousEndomorphism;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};
use crate::measures::{stream_rng, EmpiricalMeasure};
use crate::proj::{chordal_distance, AffineChart, ProjPoint};
use crate::scalar::{fmax, r, Real};
use rand::prelude::*;
use rayon::prelude::*;

/// Forward-consistency tolerance when a cocycle is built from a stored
/// orbit.
const ORBIT_TOLERANCE: f64 = 1e-8;

/// Jacobian cocycle along a finite orbit.
#[derive(Debug, Clone)]
pub struct OrbitCocycle<T: Real> {
    points: Vec<ProjPoint<T>>,
    charts: Vec<AffineChart>,
    matrices: Vec<Mat2<T>>,
}

impl<T: Real> OrbitCocycle<T> {
    /// Cocycle along the forward orbit of `x` (n steps). Charts default
    /// to the largest-modulus coordinate at each point.
    pub fn build(f: &HomogeneousEndomorphism<T>, x: &ProjPoint<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("cocycle length must be >= 1".into()));
        }
        let points = f.orbit(x, n)?;
        Self::from_orbit(f, points)
    }

    /// Cocycle along an already computed orbit (for orbits produced by
    /// backward sampling). Validates that consecutive points are actual
    /// forward images.
    pub fn from_orbit(
        f: &HomogeneousEndomorphism<T>,
        points: Vec<ProjPoint<T>>,
    ) -> Result<Self> {
        let charts: Vec<AffineChart> = points.iter().map(|p| p.best_chart()).collect();
        Self::from_orbit_with_charts(f, points, charts)
    }

    /// Cocycle along an orbit with a caller-chosen chart sequence (every
    /// chart must be admissible at its point).
    pub fn from_orbit_with_charts(
        f: &HomogeneousEndomorphism<T>,
        points: Vec<ProjPoint<T>>,
        charts: Vec<AffineChart>,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(
                "cocycle needs at least two orbit points".into(),
            ));
        }
        if charts.len() != points.len() {
            return Err(Error::InvalidInput(
                "need exactly one chart per orbit point".into(),
            ));
        }
        let tol = r::<T>(ORBIT_TOLERANCE);
        for k in 0..points.len() - 1 {
            let image = f.apply(&points[k])?;
            if chordal_distance(&image, &points[k + 1]) > tol {
                return Err(Error::InvalidInput(format!(
                    "orbit inconsistent at step {k}: point is not the forward image"
                )));
            }
        }
        let matrices: Result<Vec<Mat2<T>>> = (0..points.len() - 1)
            .map(|k| f.jacobian(&points[k], charts[k], charts[k + 1]))
            .collect();
        Ok(OrbitCocycle {
            points,
            charts,
            matrices: matrices?,
        })
    }

    /// Synthetic cocycle from raw matrices (no base orbit); used to test
    /// the estimators against closed-form spectra.
    pub fn synthetic(matrices: Vec<Mat2<T>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput("cocycle must not be empty".into()));
        }
        Ok(OrbitCocycle {
            points: Vec::new(),
            charts: Vec::new(),
            matrices,
        })
    }

    /// Number of cocycle steps.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn points(&self) -> &[ProjPoint<T>] {
        &self.points
    }

    pub fn charts(&self) -> &[AffineChart] {
        &self.charts
    }

    pub fn matrices(&self) -> &[Mat2<T>] {
        &self.matrices
    }

    /// Full matrix product A_{n−1} ⋯ A_0.
    pub fn product(&self) -> Mat2<T> {
        let mut acc = Mat2::identity();
        for m in &self.matrices {
            acc = m.mul(&acc);
        }
        acc
    }

    /// The reversed-inverse cocycle (A_k ↦ A_k⁻¹, order flipped); its top
    /// exponent is −χ₁ of the original. Fails when a determinant falls
    /// under the given threshold.
    pub fn inverse(&self, det_floor: T) -> Result<OrbitCocycle<T>> {
        let mut matrices = Vec::with_capacity(self.len());
        for m in self.matrices.iter().rev() {
            if m.det().norm() <= det_floor {
                return Err(Error::Degenerate {
                    norm: m.det().norm().to_f64().unwrap_or(0.0),
                });
            }
            matrices.push(m.inverse().expect("determinant checked"));
        }
        Ok(OrbitCocycle {
            points: Vec::new(),
            charts: Vec::new(),
            matrices,
        })
    }
}

/// Top Lyapunov exponent: (1/n) Σ log of the per-step growth of one
/// vector renormalized to unit length at every step. The deterministic
/// start vector is (1,1)/√2.
pub fn top_lyapunov<T: Real>(cocycle: &OrbitCocycle<T>) -> T {
    per_step_growth(cocycle)
        .iter()
        .fold(T::zero(), |a, &b| a + b)
        / r::<T>(cocycle.len() as f64)
}

fn per_step_growth<T: Real>(cocycle: &OrbitCocycle<T>) -> Vec<T> {
    let mut v = Vec2::diagonal_unit();
    let mut growth = Vec::with_capacity(cocycle.len());
    for m in cocycle.matrices() {
        let image = m.mul_vec(&v);
        let norm = image.norm();
        growth.push(num_traits::Float::ln(norm));
        v = image.scale(T::one() / norm);
    }
    growth
}

/// Lyapunov pair χ₁ ≤ χ₂ with a block-bootstrap standard error.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovEstimate<T: Real> {
    pub chi1: T,
    pub chi2: T,
    pub n: usize,
    pub stderr: T,
}

/// Number of blocks and resamples of the bootstrap error bar.
const BOOTSTRAP_BLOCKS: usize = 20;
const BOOTSTRAP_RESAMPLES: usize = 200;

/// χ₂ from the renormalized vector growth, χ₁ from the determinant
/// identity, sorted so χ₁ ≤ χ₂.
pub fn lyapunov_pair<T: Real>(cocycle: &OrbitCocycle<T>) -> LyapunovEstimate<T> {
    let n = cocycle.len();
    let growth = per_step_growth(cocycle);
    let inv_n = T::one() / r::<T>(n as f64);
    let top: T = growth.iter().fold(T::zero(), |a, &b| a + b) * inv_n;
    let det_sum: T = cocycle
        .matrices()
        .iter()
        .map(|m| num_traits::Float::ln(m.det().norm()))
        .fold(T::zero(), |a, b| a + b);
    let other = det_sum * inv_n - top;
    let (chi1, chi2) = if other <= top { (other, top) } else { (top, other) };

    // block bootstrap over contiguous chunks of the growth sequence
    let stderr = if n >= 2 * BOOTSTRAP_BLOCKS {
        let block_len = n / BOOTSTRAP_BLOCKS;
        let block_means: Vec<T> = (0..BOOTSTRAP_BLOCKS)
            .map(|b| {
                let chunk = &growth[b * block_len..(b + 1) * block_len];
                chunk.iter().fold(T::zero(), |a, &x| a + x) / r::<T>(block_len as f64)
            })
            .collect();
        let mut rng = stream_rng(0xb007, n as u64);
        let mut resampled = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        for _ in 0..BOOTSTRAP_RESAMPLES {
            let mean = (0..BOOTSTRAP_BLOCKS)
                .map(|_| block_means[rng.random_range(0..BOOTSTRAP_BLOCKS)])
                .fold(T::zero(), |a, b| a + b)
                / r::<T>(BOOTSTRAP_BLOCKS as f64);
            resampled.push(mean);
        }
        let mean: T = resampled.iter().fold(T::zero(), |a, &b| a + b)
            / r::<T>(BOOTSTRAP_RESAMPLES as f64);
        let var: T = resampled
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .fold(T::zero(), |a, b| a + b)
            / r::<T>((BOOTSTRAP_RESAMPLES - 1) as f64);
        num_traits::Float::sqrt(var)
    } else {
        T::zero()
    };

    LyapunovEstimate {
        chi1,
        chi2,
        n,
        stderr,
    }
}

/// Result of the Bowen-ball entropy estimator.
#[derive(Debug, Clone, Copy)]
pub struct BrinKatokEstimate<T: Real> {
    /// Average of −(1/n) log ν̂(B_n(x, ε)) over the drawn centers.
    pub entropy: T,
    /// Centers whose ball held nothing but the center itself; they
    /// contribute the resolution-floor mass 1/N.
    pub floored_centers: usize,
    pub n_centers: usize,
    /// (1/n) log N: no estimate can exceed this cap.
    pub resolution_cap: T,
    /// More than 20% floored centers: the estimate is only a
    /// lower-bound witness.
    pub floor_dominated: bool,
}

/// (1/n)·log N, the hard ceiling of the finite-sample estimator.
pub fn resolution_cap<T: Real>(n: usize, cloud_size: usize) -> T {
    num_traits::Float::ln(r::<T>(cloud_size as f64)) / r::<T>(n as f64)
}

/// Fraction of floored centers beyond which the estimate is flagged.
const FLOOR_FRACTION: f64 = 0.2;

/// Brin–Katok local entropy: average over sampled centers x of
/// −(1/n)·log of the cloud mass inside the Bowen ball B_n(x, ε) in the
/// metric d_n(x,y) = max_{0≤i≤n−1} d(f^i x, f^i y).
///
/// Centers are drawn from the cloud by weight, without replacement.
/// Every ball contains at least its own center, so the per-center mass is
/// floored at that weight; such centers are counted and flagged.
pub fn brin_katok_entropy<T: Real>(
    f: &HomogeneousEndomorphism<T>,
    cloud: &EmpiricalMeasure<T>,
    n: usize,
    epsilon: T,
    n_centers: usize,
    seed: u64,
) -> Result<BrinKatokEstimate<T>> {
    if cloud.len() < 10_000 {
        return Err(Error::InvalidInput(format!(
            "cloud size {} is below the documented regime (>= 10^4)",
            cloud.len()
        )));
    }
    if n == 0 || n_centers == 0 {
        return Err(Error::InvalidInput(
            "n and n_centers must be positive".into(),
        ));
    }
    if epsilon <= T::zero() {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }

    // orbit table: n points per cloud member (parallel, ordered)
    let orbits: Result<Vec<Vec<ProjPoint<T>>>> = cloud
        .points()
        .par_iter()
        .map(|p| f.orbit(p, n - 1))
        .collect();
    let orbits = orbits?;
    let weights = cloud.weights();

    // weighted draw without replacement
    let centers = {
        let mut rng = stream_rng(seed, 0xce17);
        let mut remaining: Vec<T> = weights.to_vec();
        let mut total: T = remaining.iter().copied().fold(T::zero(), |a, b| a + b);
        let mut picked = Vec::with_capacity(n_centers);
        for _ in 0..n_centers.min(cloud.len()) {
            let mut target = r::<T>(rng.random::<f64>()) * total;
            let mut chosen = remaining.len() - 1;
            for (idx, &w) in remaining.iter().enumerate() {
                if w <= T::zero() {
                    continue;
                }
                if target < w {
                    chosen = idx;
                    break;
                }
                target -= w;
            }
            picked.push(chosen);
            total -= remaining[chosen];
            remaining[chosen] = T::zero();
        }
        picked
    };

    let inv_n = T::one() / r::<T>(n as f64);
    let per_center: Vec<(T, bool)> = centers
        .par_iter()
        .map(|&center| {
            let center_orbit = &orbits[center];
            let mut mass = T::zero();
            for (j, orbit) in orbits.iter().enumerate() {
                let mut inside = true;
                for i in 0..n {
                    if chordal_distance(&center_orbit[i], &orbit[i]) > epsilon {
                        inside = false;
                        break;
                    }
                }
                if inside {
                    mass += weights[j];
                }
            }
            let floored = mass <= weights[center] * r::<T>(1.0 + 1e-9);
            (-num_traits::Float::ln(mass) * inv_n, floored)
        })
        .collect();

    let entropy = per_center.iter().map(|&(e, _)| e).fold(T::zero(), |a, b| a + b)
        / r::<T>(per_center.len() as f64);
    let floored_centers = per_center.iter().filter(|&&(_, fl)| fl).count();
    Ok(BrinKatokEstimate {
        entropy,
        floored_centers,
        n_centers: per_center.len(),
        resolution_cap: resolution_cap(n, cloud.len()),
        floor_dominated: (floored_centers as f64) > FLOOR_FRACTION * per_center.len() as f64,
    })
}

/// Outcome of the Ruelle inequality check h/2 ≤ Σ max(χᵢ, 0) + tol.
#[derive(Debug, Clone, Copy)]
pub struct RuelleReport<T: Real> {
    pub pass: bool,
    /// Σ max(χᵢ, 0) − h/2: positive means the inequality holds with room.
    pub margin: T,
}

pub fn ruelle_check<T: Real>(entropy: T, est: &LyapunovEstimate<T>, tol: T) -> RuelleReport<T> {
    let positive_sum = fmax(est.chi1, T::zero()) + fmax(est.chi2, T::zero());
    let margin = positive_sum - entropy / r::<T>(2.0);
    RuelleReport {
        pass: margin >= -tol,
        margin,
    }
}
