//! Samplers for the invariant measures of the laboratory.
//!
//! Three measures are produced as weighted point clouds: the equilibrium
//! measure (backward branch walks through the d² preimages of a
//! coordinate-split map), the sliced saddle measure (cell sampling of
//! slice densities over an averaged curve family), and the invariant
//! circle measure of a Siegel disk (forward rotation orbit). Every
//! sampler is a deterministic function of its inputs and seed: the RNG
//! stream of each sample is derived from (seed, sample index), so results
//! do not depend on thread count or scheduling.

use crate::endo::{HomogeneousEndomorphism, ProductMap};
use crate::error::{Error, Result};
use crate::green::{curve_point, line_slice_density, GreenEvaluator, ProjectiveLine};
use crate::poly::Poly;
use crate::proj::ProjPoint;
use crate::scalar::{c, fmax, r, Real};
use num_complex::Complex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generic starting point of backward branch walks, in the chart t = 1.
const GENERIC_START: ((f64, f64), (f64, f64)) = ((0.4, 0.3), (-0.35, 0.52));

/// SplitMix64 mixing of (seed, index) into an independent RNG stream.
pub(crate) fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut x = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    ChaCha8Rng::seed_from_u64(x)
}

/// Where a point cloud came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Mu,
    Nu,
    Alpha,
    Custom,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Mu => "mu",
            Provenance::Nu => "nu",
            Provenance::Alpha => "alpha",
            Provenance::Custom => "custom",
        }
    }

    pub fn parse(text: &str) -> Provenance {
        match text {
            "mu" => Provenance::Mu,
            "nu" => Provenance::Nu,
            "alpha" => Provenance::Alpha,
            _ => Provenance::Custom,
        }
    }
}

/// Weighted point cloud approximating an invariant measure.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure<T: Real> {
    points: Vec<ProjPoint<T>>,
    weights: Vec<T>,
    seed: u64,
    provenance: Provenance,
}

impl<T: Real> EmpiricalMeasure<T> {
    /// Build from points and nonnegative weights; weights are normalized
    /// to total mass one.
    pub fn new(
        points: Vec<ProjPoint<T>>,
        weights: Vec<T>,
        seed: u64,
        provenance: Provenance,
    ) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidInput(
                "measure needs equally many points and weights, at least one".into(),
            ));
        }
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        let total: T = weights.iter().copied().fold(T::zero(), |a, b| a + b);
        if total <= T::zero() {
            return Err(Error::InvalidInput("total weight must be positive".into()));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(EmpiricalMeasure {
            points,
            weights,
            seed,
            provenance,
        })
    }

    pub fn equal_weights(
        points: Vec<ProjPoint<T>>,
        seed: u64,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = points.len();
        let w = T::one() / r::<T>(n as f64);
        Self::new(points, vec![w; n], seed, provenance)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjPoint<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// ∫ f dμ̂ for a scalar observable.
    pub fn integrate<F: Fn(&ProjPoint<T>) -> T>(&self, f: F) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| f(p) * w)
            .fold(T::zero(), |a, b| a + b)
    }

    /// Concatenate two clouds; weights rescale by relative sample counts,
    /// which makes the merge associative and commutative up to
    /// reordering.
    pub fn merge(&self, other: &EmpiricalMeasure<T>) -> EmpiricalMeasure<T> {
        let na = r::<T>(self.len() as f64);
        let nb = r::<T>(other.len() as f64);
        let total = na + nb;
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let mut weights: Vec<T> = self.weights.iter().map(|&w| w * na / total).collect();
        weights.extend(other.weights.iter().map(|&w| w * nb / total));
        EmpiricalMeasure {
            points,
            weights,
            seed: self.seed ^ other.seed.rotate_left(17),
            provenance: if self.provenance == other.provenance {
                self.provenance
            } else {
                Provenance::Custom
            },
        }
    }

    /// Apply a map to every point, keeping the weights.
    pub fn pushforward(&self, f: &HomogeneousEndomorphism<T>) -> Result<EmpiricalMeasure<T>> {
        let points: Result<Vec<_>> = self.points.iter().map(|p| f.apply(p)).collect();
        Ok(EmpiricalMeasure {
            points: points?,
            weights: self.weights.clone(),
            seed: self.seed,
            provenance: self.provenance,
        })
    }

    /// CSV export, one row per point: the normalized lift and the weight.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "re_z,im_z,re_w,im_w,re_t,im_t,weight")?;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let l = p.lift();
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                l[0].re.to_f64().unwrap_or(f64::NAN),
                l[0].im.to_f64().unwrap_or(f64::NAN),
                l[1].re.to_f64().unwrap_or(f64::NAN),
                l[1].im.to_f64().unwrap_or(f64::NAN),
                l[2].re.to_f64().unwrap_or(f64::NAN),
                l[2].im.to_f64().unwrap_or(f64::NAN),
                w.to_f64().unwrap_or(f64::NAN)
            )?;
        }
        Ok(())
    }

    /// Inverse of [`write_csv`].
    pub fn read_csv<R: std::io::BufRead>(
        input: R,
        seed: u64,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::InvalidInput(format!("csv read error: {e}")))?;
            if idx == 0 && line.starts_with("re_z") {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("csv parse error line {idx}: {e}")))?;
            if fields.len() != 7 {
                return Err(Error::InvalidInput(format!(
                    "csv line {idx} has {} fields, expected 7",
                    fields.len()
                )));
            }
            points.push(ProjPoint::normalize([
                c::<T>(fields[0], fields[1]),
                c(fields[2], fields[3]),
                c(fields[4], fields[5]),
            ])?);
            weights.push(r::<T>(fields[6]));
        }
        Self::new(points, weights, seed, provenance)
    }
}

fn generic_start<T: Real>() -> ProjPoint<T> {
    let ((zr, zi), (wr, wi)) = GENERIC_START;
    ProjPoint::from_affine(c(zr, zi), c(wr, wi))
}

/// One uniformly chosen preimage branch (respecting multiplicity).
fn random_preimage<T: Real>(
    pm: &ProductMap<T>,
    point: &ProjPoint<T>,
    rng: &mut ChaCha8Rng,
) -> Result<ProjPoint<T>> {
    let preimages = pm.preimages(point)?;
    let d2 = pm.degree() * pm.degree();
    let mut pick = rng.random_range(0..d2);
    for (candidate, mult) in preimages {
        if pick < mult {
            return Ok(candidate);
        }
        pick -= mult;
    }
    unreachable!("multiplicities sum to d^2")
}

/// Backward branch walk of the given depth starting at `start`; returns
/// the orbit in forward order, `depth + 1` points ending at `start`.
pub fn backward_branch_orbit<T: Real>(
    pm: &ProductMap<T>,
    start: &ProjPoint<T>,
    depth: usize,
    seed: u64,
) -> Result<Vec<ProjPoint<T>>> {
    let mut rng = stream_rng(seed, 0x0b5e_55ed);
    let mut reversed = Vec::with_capacity(depth + 1);
    reversed.push(*start);
    let mut current = *start;
    for _ in 0..depth {
        current = random_preimage(pm, &current, &mut rng)?;
        reversed.push(current);
    }
    reversed.reverse();
    Ok(reversed)
}

/// Equilibrium-measure sampler: each sample follows one random preimage
/// branch (uniform over the d² inverse branches, respecting
/// multiplicity) for `n_backward` steps from a generic start.
pub fn sample_mu<T: Real>(
    pm: &ProductMap<T>,
    n_backward: usize,
    n_points: usize,
    seed: u64,
) -> Result<EmpiricalMeasure<T>> {
    if n_backward < 10 {
        return Err(Error::InvalidInput(format!(
            "n_backward must be >= 10 for equidistribution, got {n_backward}"
        )));
    }
    if n_points == 0 {
        return Err(Error::InvalidInput("n_points must be positive".into()));
    }
    let start = generic_start::<T>();
    let points: Result<Vec<ProjPoint<T>>> = (0..n_points)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(seed, index as u64);
            let mut current = start;
            for _ in 0..n_backward {
                current = random_preimage(pm, &current, &mut rng)?;
            }
            Ok(current)
        })
        .collect();
    EmpiricalMeasure::equal_weights(points?, seed, Provenance::Mu)
}

/// An orbit distributed along the equilibrium measure: one backward
/// branch walk of length `len + burn`, reversed into forward order, with
/// the `burn` shallowest points dropped. The returned `len + 1` points
/// form a genuine forward orbit that stays on the measure's support.
pub fn mu_orbit<T: Real>(
    pm: &ProductMap<T>,
    len: usize,
    burn: usize,
    seed: u64,
) -> Result<Vec<ProjPoint<T>>> {
    let start = generic_start::<T>();
    let orbit = backward_branch_orbit(pm, &start, len + burn, seed)?;
    Ok(orbit[..=len].to_vec())
}

/// One weighted curve of an averaged family: the `iterations`-fold
/// forward image of `line`, carrying weight 1/(m·d^i) and formal sheet
/// count d^i.
#[derive(Debug, Clone)]
pub struct FamilyCurve<T: Real> {
    pub line: ProjectiveLine<T>,
    pub iterations: usize,
    pub weight: T,
    pub sheets: usize,
}

/// The Cesàro-averaged family S_m = (1/m) Σ_{i<m} f^i(L)/d^i.
#[derive(Debug, Clone)]
pub struct CurveFamily<T: Real> {
    curves: Vec<FamilyCurve<T>>,
    averaging_length: usize,
}

impl<T: Real> CurveFamily<T> {
    pub fn curves(&self) -> &[FamilyCurve<T>] {
        &self.curves
    }

    pub fn averaging_length(&self) -> usize {
        self.averaging_length
    }
}

/// Build the averaged family over a line: curve i is f^i(L), evaluated
/// by composition (coefficients are never expanded), with weight
/// 1/(m·d^i). The weights satisfy Σ weight·d^i = 1.
///
/// The line is assumed generic; forward images may in principle carry
/// multiplicity, which is not detected here.
pub fn build_s_m<T: Real>(
    map: &HomogeneousEndomorphism<T>,
    line: &ProjectiveLine<T>,
    m: usize,
) -> Result<CurveFamily<T>> {
    if m < 1 {
        return Err(Error::InvalidInput(
            "averaging length m must be >= 1".into(),
        ));
    }
    let d = map.degree() as f64;
    let curves = (0..m)
        .map(|i| FamilyCurve {
            line: line.clone(),
            iterations: i,
            weight: r::<T>(1.0 / (m as f64 * d.powi(i as i32))),
            sheets: map.degree().pow(i as u32),
        })
        .collect();
    Ok(CurveFamily {
        curves,
        averaging_length: m,
    })
}

/// Sliced-measure sampler: computes the slice density of T on every
/// family curve and draws points proportionally to curve weight × cell
/// weight, jittered uniformly inside the parameter cell.
pub fn sample_nu<T: Real>(
    ge: &GreenEvaluator<T>,
    family: &CurveFamily<T>,
    grid_size: usize,
    n_points: usize,
    seed: u64,
) -> Result<EmpiricalMeasure<T>> {
    if n_points == 0 {
        return Err(Error::InvalidInput("n_points must be positive".into()));
    }
    let densities: Result<Vec<_>> = family
        .curves()
        .par_iter()
        .map(|curve| line_slice_density(ge, &curve.line, curve.iterations, grid_size))
        .collect();
    let densities = densities?;

    // curve selection proportional to weight × measured slice mass
    let curve_masses: Vec<T> = family
        .curves()
        .iter()
        .zip(&densities)
        .map(|(curve, density)| curve.weight * density.total_mass())
        .collect();
    let total_mass: T = curve_masses.iter().copied().fold(T::zero(), |a, b| a + b);
    if total_mass <= T::zero() {
        return Err(Error::InvalidInput(
            "family has no positive slice mass".into(),
        ));
    }
    let curve_cdf: Vec<T> = curve_masses
        .iter()
        .scan(T::zero(), |acc, &m| {
            *acc += m / total_mass;
            Some(*acc)
        })
        .collect();
    let cell_cdfs: Vec<Vec<T>> = densities
        .iter()
        .map(|density| {
            let total = density
                .cells()
                .iter()
                .map(|cell| cell.weight)
                .fold(T::zero(), |a, b| a + b);
            density
                .cells()
                .iter()
                .scan(T::zero(), |acc, cell| {
                    *acc += cell.weight / total;
                    Some(*acc)
                })
                .collect()
        })
        .collect();

    let pick = |cdf: &[T], u: T| -> usize {
        cdf.partition_point(|&probe| probe < u).min(cdf.len() - 1)
    };

    let points: Result<Vec<ProjPoint<T>>> = (0..n_points)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(seed, index as u64);
            let u_curve = r::<T>(rng.random::<f64>());
            let ci = pick(&curve_cdf, u_curve);
            let u_cell = r::<T>(rng.random::<f64>());
            let cell_idx = pick(&cell_cdfs[ci], u_cell);
            let cell = densities[ci].cells()[cell_idx];
            let h = densities[ci].spacing();
            let jitter = Complex::new(
                (r::<T>(rng.random::<f64>()) - r::<T>(0.5)) * h,
                (r::<T>(rng.random::<f64>()) - r::<T>(0.5)) * h,
            );
            let curve = &family.curves()[ci];
            curve_point(
                ge.map(),
                &curve.line,
                curve.iterations,
                cell.chart,
                cell.center + jitter,
            )
        })
        .collect();
    EmpiricalMeasure::equal_weights(points?, seed, Provenance::Nu)
}

/// Truncated linearization Φ of R(z) = λz + z² at an irrational rotation:
/// Φ∘R = λ·Φ with Φ(z) = z + Σ_{k≥2} c_k z^k.
#[derive(Debug, Clone)]
pub struct SiegelLinearization<T: Real> {
    lambda: Complex<T>,
    /// coeffs[k] is c_k (coeffs[0] = 0, coeffs[1] = 1).
    coeffs: Vec<Complex<T>>,
    radius_estimate: T,
    residual: T,
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=i).rev() {
            row[j] += row[j - 1];
        }
    }
    row[k]
}

/// Residual samples on a circle used to validate the truncation.
const RESIDUAL_SAMPLES: usize = 256;
/// Hard cap on the functional-equation residual at radius/2.
const RESIDUAL_LIMIT: f64 = 1e-8;

/// Match powers in Φ(λz + z²) = λ·Φ(z): every c_k is a finite
/// convolution of earlier coefficients divided by the small divisor
/// λ^k − λ. Reports `SmallDivisorOverflow` at near-resonant multipliers.
pub fn siegel_linearize<T: Real>(
    lambda: Complex<T>,
    n_terms: usize,
) -> Result<SiegelLinearization<T>> {
    if !(2..=64).contains(&n_terms) {
        return Err(Error::InvalidInput(format!(
            "n_terms must lie in 2..=64, got {n_terms}"
        )));
    }
    if num_traits::Float::abs(lambda.norm() - T::one()) > r::<T>(1e-9) {
        return Err(Error::InvalidInput(
            "multiplier must lie on the unit circle".into(),
        ));
    }

    let zero = Complex::new(T::zero(), T::zero());
    let mut coeffs = vec![zero; n_terms + 1];
    coeffs[1] = Complex::new(T::one(), T::zero());
    let mut lambda_pow = vec![Complex::new(T::one(), T::zero()); 2 * n_terms + 1];
    for k in 1..lambda_pow.len() {
        lambda_pow[k] = lambda_pow[k - 1] * lambda;
    }
    for k in 2..=n_terms {
        let divisor = lambda_pow[k] - lambda;
        if divisor.norm() < r::<T>(1e-12) {
            return Err(Error::SmallDivisorOverflow {
                order: k,
                modulus: divisor.norm().to_f64().unwrap_or(0.0),
            });
        }
        let mut acc = zero;
        let j_min = k.div_ceil(2);
        for j in j_min..k {
            let bin = r::<T>(binomial_u128(j, k - j) as f64);
            acc += coeffs[j] * bin * lambda_pow[2 * j - k];
        }
        coeffs[k] = -acc / divisor;
    }

    // radius where the truncated terms stop decreasing, with 0.8 headroom
    let mut ratio_min = T::infinity();
    for k in 1..n_terms {
        let denom = coeffs[k + 1].norm();
        if denom > T::zero() {
            ratio_min = crate::scalar::fmin(ratio_min, coeffs[k].norm() / denom);
        }
    }
    if !num_traits::Float::is_finite(ratio_min) {
        return Err(Error::InvalidInput(
            "degenerate linearization coefficients".into(),
        ));
    }
    let mut radius = r::<T>(0.8) * ratio_min;

    // validate by the functional-equation residual on |z| = radius/2,
    // shrinking while the truncation is not yet in its convergent regime
    let mut lin = SiegelLinearization {
        lambda,
        coeffs,
        radius_estimate: radius,
        residual: T::infinity(),
    };
    for _ in 0..8 {
        let residual = lin.residual_on_circle(radius / r::<T>(2.0));
        if residual <= r::<T>(RESIDUAL_LIMIT) {
            lin.radius_estimate = radius;
            lin.residual = residual;
            return Ok(lin);
        }
        radius *= r::<T>(0.8);
    }
    Err(Error::InvalidInput(format!(
        "linearization residual stayed above {RESIDUAL_LIMIT}; raise n_terms"
    )))
}

impl<T: Real> SiegelLinearization<T> {
    pub fn multiplier(&self) -> Complex<T> {
        self.lambda
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn radius_estimate(&self) -> T {
        self.radius_estimate
    }

    /// Max functional-equation residual measured at construction.
    pub fn residual(&self) -> T {
        self.residual
    }

    /// Truncated Φ(z).
    pub fn phi(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &ck in self.coeffs.iter().rev() {
            acc = acc * z + ck;
        }
        acc
    }

    /// Truncated Φ′(z).
    pub fn phi_prime(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in (1..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[k] * r::<T>(k as f64);
        }
        acc
    }

    /// R(z) = λz + z².
    pub fn rotation_map(&self, z: Complex<T>) -> Complex<T> {
        self.lambda * z + z * z
    }

    /// Newton-invert Φ near the disk: solve Φ(z) = target.
    pub fn phi_inverse(&self, target: Complex<T>) -> Result<Complex<T>> {
        let mut z = target;
        for _ in 0..50 {
            let err = self.phi(z) - target;
            if err.norm() < r::<T>(1e-14) {
                return Ok(z);
            }
            let dphi = self.phi_prime(z);
            if dphi.norm() < r::<T>(1e-14) {
                break;
            }
            z -= err / dphi;
        }
        Err(Error::RootFindingFailure(
            "phi inversion did not converge".into(),
        ))
    }

    fn residual_on_circle(&self, radius: T) -> T {
        let mut worst = T::zero();
        for k in 0..RESIDUAL_SAMPLES {
            let angle = r::<T>(2.0) * T::PI() * r::<T>(k as f64 / RESIDUAL_SAMPLES as f64);
            let z = Complex::from_polar(radius, angle);
            let lhs = self.phi(self.rotation_map(z));
            let rhs = self.lambda * self.phi(z);
            worst = fmax(worst, (lhs - rhs).norm());
        }
        worst
    }
}

/// Escape multiple of the disk radius that aborts a circle orbit.
const ESCAPE_FACTOR: f64 = 10.0;

/// Rotation-circle sampler: equal weights on R^{n_skip}(a₀), …,
/// R^{n_skip + n_points − 1}(a₀), embedded on the z-axis {w = 0}.
pub fn sample_alpha<T: Real>(
    lin: &SiegelLinearization<T>,
    a0: Complex<T>,
    n_skip: usize,
    n_points: usize,
) -> Result<EmpiricalMeasure<T>> {
    if n_points == 0 {
        return Err(Error::InvalidInput("n_points must be positive".into()));
    }
    if lin.phi(a0).norm() >= lin.radius_estimate() {
        return Err(Error::EscapedSiegelDisk {
            step: 0,
            modulus: a0.norm().to_f64().unwrap_or(f64::NAN),
        });
    }
    let escape = lin.radius_estimate() * r::<T>(ESCAPE_FACTOR);
    let mut z = a0;
    let mut points = Vec::with_capacity(n_points);
    for step in 0..n_skip + n_points {
        if z.norm() > escape {
            return Err(Error::EscapedSiegelDisk {
                step,
                modulus: z.norm().to_f64().unwrap_or(f64::NAN),
            });
        }
        if step >= n_skip {
            points.push(ProjPoint::from_affine(
                z,
                Complex::new(T::zero(), T::zero()),
            ));
        }
        z = lin.rotation_map(z);
    }
    EmpiricalMeasure::equal_weights(points, 0, Provenance::Alpha)
}

/// Backward orbit distributed along the sliced measure of the Siegel
/// product map: the z-branch follows the invariant circle (the unique
/// preimage with matching |Φ| level), the w-branch is uniform over the
/// inverse branches. Returned in forward order, `len + 1` points.
pub fn siegel_nu_orbit<T: Real>(
    pm: &ProductMap<T>,
    lin: &SiegelLinearization<T>,
    start: &ProjPoint<T>,
    len: usize,
    seed: u64,
) -> Result<Vec<ProjPoint<T>>> {
    let t_chart = crate::proj::AffineChart::new(2);
    let (mut z, mut w) = crate::proj::to_chart(start, t_chart)?;
    let level = lin.phi(z).norm();
    let mut rng = stream_rng(seed, 0x5eed_005e);
    let mut reversed = Vec::with_capacity(len + 1);
    reversed.push(*start);
    for _ in 0..len {
        // z-branch: the root of p(z') = z staying on the invariant circle
        let mut shifted = pm.p().coeffs().to_vec();
        shifted[0] -= z;
        let z_roots = Poly::new(shifted).roots()?;
        let mut best = z_roots[0].0;
        let mut best_err = T::infinity();
        for &(root, _) in &z_roots {
            let err = num_traits::Float::abs(lin.phi(root).norm() - level);
            if err < best_err {
                best_err = err;
                best = root;
            }
        }
        z = best;
        // w-branch: uniform with multiplicity
        let mut shifted = pm.q().coeffs().to_vec();
        shifted[0] -= w;
        let w_roots = Poly::new(shifted).roots()?;
        let d = pm.degree();
        let mut pick = rng.random_range(0..d);
        let mut chosen = w_roots[0].0;
        for &(root, mult) in &w_roots {
            if pick < mult {
                chosen = root;
                break;
            }
            pick -= mult;
        }
        w = chosen;
        reversed.push(ProjPoint::from_affine(z, w));
    }
    reversed.reverse();
    Ok(reversed)
}

/// 1D inverse-iteration sampler for the equilibrium measure of a
/// univariate polynomial: independent backward branch walks in one
/// complex variable. The one-dimensional oracle of the laboratory.
pub fn inverse_iteration_1d<T: Real>(
    poly: &Poly<T>,
    n_backward: usize,
    n_points: usize,
    seed: u64,
) -> Result<Vec<Complex<T>>> {
    let start = c::<T>(0.41, 0.27);
    (0..n_points)
        .into_par_iter()
        .map(|index| {
            let mut rng = stream_rng(seed, index as u64);
            let mut z = start;
            for _ in 0..n_backward {
                let mut shifted = poly.coeffs().to_vec();
                shifted[0] -= z;
                let roots = Poly::new(shifted).roots()?;
                let d = poly.degree();
                let mut pick = rng.random_range(0..d);
                let mut chosen = roots[0].0;
                for &(root, mult) in &roots {
                    if pick < mult {
                        chosen = root;
                        break;
                    }
                    pick -= mult;
                }
                z = chosen;
            }
            Ok(z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endo::{rotation_multiplier, siegel_map, squaring_map};
    use crate::green::{GreenEvaluator, ParamChart};
    use crate::proj::{chordal_distance, to_chart, AffineChart};

    const GOLDEN_THETA: f64 = 0.6180339887498949;

    #[test]
    fn measure_weights_normalized_and_merge_associative() {
        let pt = |x: f64| ProjPoint::from_affine(c(x, 0.0), c(0.0, 0.0));
        let a = EmpiricalMeasure::new(
            vec![pt(0.0), pt(1.0)],
            vec![1.0, 3.0],
            1,
            Provenance::Custom,
        )
        .unwrap();
        let total: f64 = a.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let b = EmpiricalMeasure::equal_weights(vec![pt(2.0)], 2, Provenance::Custom).unwrap();
        let d = EmpiricalMeasure::equal_weights(
            vec![pt(3.0), pt(4.0), pt(5.0)],
            3,
            Provenance::Custom,
        )
        .unwrap();
        let left = a.merge(&b).merge(&d);
        let right = a.merge(&b.merge(&d));
        assert_eq!(left.len(), right.len());
        for (wl, wr) in left.weights().iter().zip(right.weights()) {
            assert!((wl - wr).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_roundtrip() {
        let f = squaring_map::<f64>();
        let mu = sample_mu(&f, 10, 50, 4).unwrap();
        let mut buffer = Vec::new();
        mu.write_csv(&mut buffer).unwrap();
        let back =
            EmpiricalMeasure::<f64>::read_csv(std::io::Cursor::new(buffer), 4, Provenance::Mu)
                .unwrap();
        assert_eq!(back.len(), mu.len());
        for (p, q) in mu.points().iter().zip(back.points()) {
            assert!(chordal_distance(p, q) < 1e-12);
        }
    }

    #[test]
    fn sample_mu_concentrates_on_unit_torus() {
        let f = squaring_map::<f64>();
        let mu = sample_mu(&f, 14, 10_000, 7).unwrap();
        let chart = AffineChart::new(2);
        let mean_log_abs_z = mu.integrate(|p| {
            let (z, _) = to_chart(p, chart).unwrap();
            z.norm().ln()
        });
        assert!(
            mean_log_abs_z.abs() <= 0.01,
            "mean log|z| = {mean_log_abs_z}"
        );
    }

    #[test]
    fn sample_mu_lies_in_green_regular_locus() {
        let f = squaring_map::<f64>();
        let ge = GreenEvaluator::new(f.endo().clone(), 25).unwrap();
        let mu = sample_mu(&f, 14, 2000, 3).unwrap();
        let slack = ge.error_bound() + ge.u_bound() / 2.0f64.powi(14);
        let ok = mu
            .points()
            .iter()
            .filter(|p| ge.green(p).unwrap().0.abs() <= slack)
            .count();
        assert!(ok as f64 >= 0.99 * mu.len() as f64, "{ok} of {}", mu.len());
    }

    #[test]
    fn sample_mu_deterministic_and_seed_partition() {
        let f = squaring_map::<f64>();
        let a = sample_mu(&f, 12, 500, 99).unwrap();
        let b = sample_mu(&f, 12, 500, 99).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!(chordal_distance(p, q), 0.0);
        }
        // partitioned seeds merge to the same statistics within 2/√N
        let half1 = sample_mu(&f, 12, 4000, 11).unwrap();
        let half2 = sample_mu(&f, 12, 4000, 12).unwrap();
        let merged = half1.merge(&half2);
        let chart = AffineChart::new(2);
        let mean_re_z = merged.integrate(|p| to_chart(p, chart).unwrap().0.re);
        assert!(mean_re_z.abs() <= 2.0 / (8000.0f64).sqrt());
    }

    #[test]
    fn mu_orbit_is_forward_orbit_on_support() {
        let f = squaring_map::<f64>();
        let orbit = mu_orbit(&f, 200, 30, 5).unwrap();
        assert_eq!(orbit.len(), 201);
        for k in 0..200 {
            let image = f.apply(&orbit[k]).unwrap();
            assert!(chordal_distance(&image, &orbit[k + 1]) < 1e-9);
        }
        let chart = AffineChart::new(2);
        for p in &orbit {
            let (z, w) = to_chart(p, chart).unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-6);
            assert!((w.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn family_weights_normalize() {
        let f = siegel_map::<f64>(GOLDEN_THETA);
        let line = ProjectiveLine::vertical(c(0.02, 0.01));
        let family = build_s_m(f.endo(), &line, 6).unwrap();
        assert_eq!(family.curves().len(), 6);
        let total: f64 = family
            .curves()
            .iter()
            .map(|curve| curve.weight * curve.sheets as f64)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);

        let single = build_s_m(f.endo(), &line, 1).unwrap();
        assert_eq!(single.curves().len(), 1);
        assert!((single.curves()[0].weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn family_images_are_rotated_lines() {
        let f = siegel_map::<f64>(GOLDEN_THETA);
        let lambda = rotation_multiplier(GOLDEN_THETA);
        let a = c::<f64>(0.02, 0.01);
        let line = ProjectiveLine::vertical(a);
        let family = build_s_m(f.endo(), &line, 4).unwrap();
        let mut expected = a;
        for (i, curve) in family.curves().iter().enumerate() {
            if i > 0 {
                expected = lambda * expected + expected * expected;
            }
            let probe = curve_point(
                f.endo(),
                &curve.line,
                curve.iterations,
                ParamChart::Finite,
                c(0.3, -0.2),
            )
            .unwrap();
            let chart = AffineChart::new(2);
            let (z, _) = to_chart(&probe, chart).unwrap();
            assert!((z - expected).norm() < 1e-10, "curve {i}");
        }
    }

    #[test]
    fn siegel_c2_matches_closed_form() {
        let lambda = rotation_multiplier::<f64>(GOLDEN_THETA);
        let lin = siegel_linearize(lambda, 32).unwrap();
        let expected = 1.0 / (lambda - lambda * lambda);
        assert!((lin.coefficients()[2] - expected).norm() < 1e-14);
    }

    #[test]
    fn siegel_residual_below_threshold_at_golden_mean() {
        let lambda = rotation_multiplier::<f64>(GOLDEN_THETA);
        let lin = siegel_linearize(lambda, 48).unwrap();
        assert!(lin.residual() <= 1e-8, "residual {}", lin.residual());
        assert!(lin.radius_estimate() > 0.0);
    }

    #[test]
    fn siegel_resonant_multiplier_rejected() {
        // θ = 1/2: λ = −1 and λ³ = λ, so order 3 resonates
        let lambda = rotation_multiplier::<f64>(0.5);
        match siegel_linearize(lambda, 16) {
            Err(Error::SmallDivisorOverflow { order, .. }) => assert_eq!(order, 3),
            other => panic!("expected SmallDivisorOverflow, got {other:?}"),
        }
    }

    #[test]
    fn alpha_fixed_point_degenerates() {
        let lambda = rotation_multiplier::<f64>(GOLDEN_THETA);
        let lin = siegel_linearize(lambda, 48).unwrap();
        let alpha = sample_alpha(&lin, c(0.0, 0.0), 10, 100).unwrap();
        let chart = AffineChart::new(2);
        for p in alpha.points() {
            let (z, _) = to_chart(p, chart).unwrap();
            assert!(z.norm() < 1e-14);
        }
    }

    #[test]
    fn alpha_level_constant_and_birkhoff_neutral() {
        let lambda = rotation_multiplier::<f64>(GOLDEN_THETA);
        let lin = siegel_linearize(lambda, 48).unwrap();
        let a0 = lin
            .phi_inverse(c(0.05 * lin.radius_estimate(), 0.0))
            .unwrap();
        let level = lin.phi(a0).norm();
        let alpha = sample_alpha(&lin, a0, 100, 20_000).unwrap();
        let chart = AffineChart::new(2);
        let mut birkhoff = 0.0f64;
        for p in alpha.points() {
            let (z, _) = to_chart(p, chart).unwrap();
            let here = lin.phi(z).norm();
            assert!((here - level).abs() / level <= 1e-6);
            birkhoff += (lambda + z * 2.0).norm().ln();
        }
        birkhoff /= alpha.len() as f64;
        assert!(birkhoff.abs() <= 0.01, "birkhoff = {birkhoff}");
    }

    #[test]
    fn alpha_equidistributes_by_weyl_sum() {
        let lambda = rotation_multiplier::<f64>(GOLDEN_THETA);
        let lin = siegel_linearize(lambda, 48).unwrap();
        let a0 = lin
            .phi_inverse(c(0.05 * lin.radius_estimate(), 0.0))
            .unwrap();
        let alpha = sample_alpha(&lin, a0, 50, 10_000).unwrap();
        let chart = AffineChart::new(2);
        let mut sum = c::<f64>(0.0, 0.0);
        for p in alpha.points() {
            let (z, _) = to_chart(p, chart).unwrap();
            let arg = lin.phi(z).arg();
            sum += Complex::from_polar(1.0, arg);
        }
        let n = alpha.len() as f64;
        assert!((sum / n).norm() <= 3.0 / n.sqrt());
    }

    #[test]
    fn alpha_escape_detection() {
        let lambda = rotation_multiplier::<f64>(GOLDEN_THETA);
        let lin = siegel_linearize(lambda, 48).unwrap();
        assert!(matches!(
            sample_alpha(&lin, c(0.6, 0.0), 10, 100),
            Err(Error::EscapedSiegelDisk { .. })
        ));
    }

    #[test]
    fn nu_orbit_is_forward_orbit() {
        let f = siegel_map::<f64>(GOLDEN_THETA);
        let lambda = rotation_multiplier::<f64>(GOLDEN_THETA);
        let lin = siegel_linearize(lambda, 48).unwrap();
        let a0 = lin
            .phi_inverse(c(0.05 * lin.radius_estimate(), 0.0))
            .unwrap();
        let start = ProjPoint::from_affine(a0, c(0.3, 0.2));
        let orbit = siegel_nu_orbit(&f, &lin, &start, 300, 17).unwrap();
        assert_eq!(orbit.len(), 301);
        let level = lin.phi(a0).norm();
        let chart = AffineChart::new(2);
        for k in 0..300 {
            let image = f.apply(&orbit[k]).unwrap();
            assert!(chordal_distance(&image, &orbit[k + 1]) < 1e-9, "step {k}");
            let (z, _) = to_chart(&orbit[k], chart).unwrap();
            assert!((lin.phi(z).norm() - level).abs() / level < 1e-6);
        }
    }

    #[test]
    fn inverse_iteration_1d_matches_doubling_measure() {
        // z² has equilibrium measure uniform on the unit circle
        let square = Poly::<f64>::from_f64_pairs(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let samples = inverse_iteration_1d(&square, 20, 5000, 5).unwrap();
        let mean_log: f64 =
            samples.iter().map(|z| z.norm().ln()).sum::<f64>() / samples.len() as f64;
        assert!(mean_log.abs() < 1e-3);
    }
}
