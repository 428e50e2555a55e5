//! The dynamical Green potential G with a certified error bound, and
//! slice densities of the Green current along parametrized curves.
//!
//! With ω the Fubini–Study form normalized to unit line mass, one has
//! f*ω/d = ω + ddᶜu with u(p) = (1/d)·log‖F(Z)‖ on unit lifts Z. The
//! partial sums G_n = Σ_{l<n} u∘f^l / d^l converge geometrically and the
//! tail is controlled by a sampled bound on |u|, which gives every Green
//! value a per-point error bar. The Green current is T = ω + ddᶜG; its
//! slice along a parametrized curve is computed as the discrete Laplacian
//! of the curve potential G∘γ + log‖Γ‖ on a two-chart parameter grid.

use crate::endo::HomogeneousEndomorphism;
use crate::error::{Error, Result};
use crate::proj::{lift_norm, ProjPoint};
use crate::quasi;
use crate::scalar::{fmax, r, Real};
use num_complex::Complex;
use rayon::prelude::*;

/// Sample count behind the u_bound estimate.
const U_BOUND_SAMPLES: usize = 100_000;
/// Headroom multiplier on the sampled sup of |u|.
const U_BOUND_HEADROOM: f64 = 1.05;
/// Relative clipped-mass threshold above which slicing reports a defect.
const CLIP_LIMIT: f64 = 0.01;
/// Half-width of each parameter chart: the owned unit disc plus one
/// stencil margin.
const CHART_EXTENT: f64 = 1.2;

/// u(p) = (1/d)·log‖F(Z)‖ for the unit lift Z of p.
pub fn u_potential<T: Real>(map: &HomogeneousEndomorphism<T>, p: &ProjPoint<T>) -> Result<T> {
    let image = map.eval_lift(p.lift());
    let norm = lift_norm(&image);
    if norm < r::<T>(1e-300) {
        return Err(Error::Degenerate {
            norm: norm.to_f64().unwrap_or(0.0),
        });
    }
    Ok(num_traits::Float::ln(norm) / r::<T>(map.degree() as f64))
}

/// Certified evaluator of the Green potential of a map.
#[derive(Debug, Clone)]
pub struct GreenEvaluator<T: Real> {
    map: HomogeneousEndomorphism<T>,
    n_iter: usize,
    u_bound: T,
}

impl<T: Real> GreenEvaluator<T> {
    /// Estimate u_bound as 1.05 × the max of |u| over 10⁵ quasi-random
    /// unit lifts, then build the evaluator.
    pub fn new(map: HomogeneousEndomorphism<T>, n_iter: usize) -> Result<Self> {
        if n_iter == 0 {
            return Err(Error::InvalidInput("n_iter must be >= 1".into()));
        }
        let lifts = quasi::unit_lifts::<T>(U_BOUND_SAMPLES);
        let sup = lifts
            .par_iter()
            .map(|lift| {
                let p = ProjPoint::normalize(*lift).expect("quasi lift is unit");
                u_potential(&map, &p)
                    .map(num_traits::Float::abs)
                    .unwrap_or(T::zero())
            })
            .reduce(T::zero, fmax);
        Ok(GreenEvaluator {
            map,
            n_iter,
            u_bound: sup * r::<T>(U_BOUND_HEADROOM),
        })
    }

    /// Build with a caller-supplied u_bound (skips the sampling pass).
    pub fn with_u_bound(map: HomogeneousEndomorphism<T>, n_iter: usize, u_bound: T) -> Result<Self> {
        if n_iter == 0 {
            return Err(Error::InvalidInput("n_iter must be >= 1".into()));
        }
        Ok(GreenEvaluator {
            map,
            n_iter,
            u_bound,
        })
    }

    pub fn map(&self) -> &HomogeneousEndomorphism<T> {
        &self.map
    }

    pub fn n_iter(&self) -> usize {
        self.n_iter
    }

    pub fn u_bound(&self) -> T {
        self.u_bound
    }

    fn degree(&self) -> T {
        r::<T>(self.map.degree() as f64)
    }

    /// Tail bound u_bound · d^{−n_iter} / (1 − 1/d) of the truncated series.
    pub fn error_bound(&self) -> T {
        let d = self.degree();
        let tail = num_traits::Float::powi(d, -(self.n_iter as i32));
        self.u_bound * tail / (T::one() - T::one() / d)
    }

    /// Green value with its certified error bound. The sum is evaluated
    /// with per-step renormalization: lifts stay unit, only logs add up.
    pub fn green(&self, p: &ProjPoint<T>) -> Result<(T, T)> {
        let d = self.degree();
        let mut value = T::zero();
        let mut scale = T::one();
        let mut point = *p;
        for _ in 0..self.n_iter {
            let image = self.map.eval_lift(point.lift());
            let norm = lift_norm(&image);
            if norm < r::<T>(1e-300) {
                return Err(Error::Degenerate {
                    norm: norm.to_f64().unwrap_or(0.0),
                });
            }
            value += scale * num_traits::Float::ln(norm) / d;
            scale /= d;
            point = ProjPoint::normalize(image)?;
        }
        Ok((value, self.error_bound()))
    }

    /// Successive partial sums G_1, …, G_{n_iter}; convergence-rate
    /// diagnostics read |G_{n+1} − G_n| off this.
    pub fn partial_sums(&self, p: &ProjPoint<T>) -> Result<Vec<T>> {
        let d = self.degree();
        let mut sums = Vec::with_capacity(self.n_iter);
        let mut value = T::zero();
        let mut scale = T::one();
        let mut point = *p;
        for _ in 0..self.n_iter {
            let image = self.map.eval_lift(point.lift());
            let norm = lift_norm(&image);
            if norm < r::<T>(1e-300) {
                return Err(Error::Degenerate {
                    norm: norm.to_f64().unwrap_or(0.0),
                });
            }
            value += scale * num_traits::Float::ln(norm) / d;
            sums.push(value);
            scale /= d;
            point = ProjPoint::normalize(image)?;
        }
        Ok(sums)
    }

    /// |G(f p) − d·(G(p) − u(p))|: the telescoping identity residual,
    /// bounded by 3·d·error_bound for a correct implementation.
    pub fn functional_equation_residual(&self, p: &ProjPoint<T>) -> Result<T> {
        let d = self.degree();
        let fp = self.map.apply(p)?;
        let left = self.green(&fp)?.0;
        let right = d * (self.green(p)?.0 - u_potential(&self.map, p)?);
        Ok(num_traits::Float::abs(left - right))
    }
}

/// A projective line with the parametrized lift Γ(ζ) = A + Bζ.
///
/// In the chart at infinity (η = 1/ζ) the lift is Γ∞(η) = Aη + B, which
/// is holomorphic and nonvanishing, so both charts carry honest
/// potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveLine<T: Real> {
    a: [Complex<T>; 3],
    b: [Complex<T>; 3],
}

impl<T: Real> ProjectiveLine<T> {
    /// Line through two distinct projective points (γ(0) = p, γ(∞) = q).
    pub fn through(p: &ProjPoint<T>, q: &ProjPoint<T>) -> Result<Self> {
        if crate::proj::chordal_distance(p, q) < r::<T>(1e-9) {
            return Err(Error::InvalidInput(
                "line requires two distinct points".into(),
            ));
        }
        Ok(ProjectiveLine {
            a: *p.lift(),
            b: *q.lift(),
        })
    }

    /// Raw lifts (γ(0), γ(∞)); used by reparametrization tests.
    pub fn from_lifts(a: [Complex<T>; 3], b: [Complex<T>; 3]) -> Self {
        ProjectiveLine { a, b }
    }

    /// The vertical line z = a in the chart t = 1, parametrized by w.
    pub fn vertical(a: Complex<T>) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        ProjectiveLine {
            a: [a, zero, one],
            b: [zero, one, zero],
        }
    }

    /// The horizontal line w = b in the chart t = 1, parametrized by z.
    pub fn horizontal(b: Complex<T>) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        ProjectiveLine {
            a: [zero, b, one],
            b: [one, zero, zero],
        }
    }

    /// Precompose the parametrization with ζ ↦ (aζ + b)/(cζ + e):
    /// the lift becomes (eA + bB) + ζ·(cA + aB).
    pub fn moebius_reparam(
        &self,
        a: Complex<T>,
        b: Complex<T>,
        c: Complex<T>,
        e: Complex<T>,
    ) -> Self {
        let combine = |s: Complex<T>, t: Complex<T>| {
            [
                self.a[0] * s + self.b[0] * t,
                self.a[1] * s + self.b[1] * t,
                self.a[2] * s + self.b[2] * t,
            ]
        };
        ProjectiveLine {
            a: combine(e, b),
            b: combine(c, a),
        }
    }

    /// Lift at a finite-chart parameter.
    pub fn lift_at(&self, zeta: Complex<T>) -> [Complex<T>; 3] {
        [
            self.a[0] + self.b[0] * zeta,
            self.a[1] + self.b[1] * zeta,
            self.a[2] + self.b[2] * zeta,
        ]
    }

    /// Lift at an infinity-chart parameter η (η = 0 is γ(∞)).
    pub fn lift_at_infinity_chart(&self, eta: Complex<T>) -> [Complex<T>; 3] {
        [
            self.a[0] * eta + self.b[0],
            self.a[1] * eta + self.b[1],
            self.a[2] * eta + self.b[2],
        ]
    }
}

/// Which of the two parameter charts a slice cell lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamChart {
    /// ζ-chart cell, |ζ| ≤ 1.
    Finite,
    /// η = 1/ζ chart cell, |η| < 1.
    Infinity,
}

/// One cell of a slice density.
#[derive(Debug, Clone, Copy)]
pub struct SliceCell<T: Real> {
    pub chart: ParamChart,
    /// Parameter of the cell center, in the cell's own chart.
    pub center: Complex<T>,
    pub weight: T,
}

/// Discrete slice measure T ∧ [γ] on the parameter grid of the curve.
#[derive(Debug, Clone)]
pub struct SliceDensity<T: Real> {
    grid_size: usize,
    spacing: T,
    cells: Vec<SliceCell<T>>,
    total_mass: T,
    clipped_fraction: T,
}

impl<T: Real> SliceDensity<T> {
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Grid spacing in the parameter charts.
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn cells(&self) -> &[SliceCell<T>] {
        &self.cells
    }

    /// Total mass after clipping and renormalization (the cohomological
    /// mass of the slice: 1 for a line, d^i for an i-fold image).
    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    /// Fraction of the total mass removed by clipping negative cells.
    pub fn clipped_fraction(&self) -> T {
        self.clipped_fraction
    }

    /// CSV export: `re_zeta, im_zeta, weight` per cell; infinity-chart
    /// cells are written at their ζ = 1/η position.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "re_zeta,im_zeta,weight")?;
        for cell in &self.cells {
            let zeta = match cell.chart {
                ParamChart::Finite => cell.center,
                ParamChart::Infinity => cell.center.inv(),
            };
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e}",
                zeta.re.to_f64().unwrap_or(f64::NAN),
                zeta.im.to_f64().unwrap_or(f64::NAN),
                cell.weight.to_f64().unwrap_or(f64::NAN)
            )?;
        }
        Ok(())
    }

    /// 8-bit binary PGM heatmap of the finite-chart cells, row-major,
    /// weights scaled linearly to [0, 255].
    pub fn write_pgm<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        let n = self.grid_size;
        let mut image = vec![0.0f64; n * n];
        let h = 2.0 * CHART_EXTENT / n as f64;
        let mut max_weight = 0.0f64;
        for cell in &self.cells {
            if cell.chart != ParamChart::Finite {
                continue;
            }
            let x = cell.center.re.to_f64().unwrap_or(0.0);
            let y = cell.center.im.to_f64().unwrap_or(0.0);
            let col =
                (((x + CHART_EXTENT) / h - 0.5).round() as isize).clamp(0, n as isize - 1) as usize;
            let row =
                (((y + CHART_EXTENT) / h - 0.5).round() as isize).clamp(0, n as isize - 1) as usize;
            let w = cell.weight.to_f64().unwrap_or(0.0);
            image[row * n + col] = w;
            max_weight = max_weight.max(w);
        }
        writeln!(out, "P5")?;
        writeln!(out, "{n} {n}")?;
        writeln!(out, "255")?;
        let scale = if max_weight > 0.0 {
            255.0 / max_weight
        } else {
            0.0
        };
        let bytes: Vec<u8> = image
            .iter()
            .map(|&w| (w * scale).round().clamp(0.0, 255.0) as u8)
            .collect();
        out.write_all(&bytes)
    }
}

/// Curve potential V = G(γᵢ(ζ)) + log‖Γᵢ(ζ)‖ for the i-fold forward image
/// of a line, evaluated by composition with per-step renormalization (no
/// coefficient blow-up).
fn curve_potential<T: Real>(
    ge: &GreenEvaluator<T>,
    iterations: usize,
    lift: [Complex<T>; 3],
) -> Result<T> {
    let norm0 = lift_norm(&lift);
    if norm0 < r::<T>(1e-300) {
        return Err(Error::Degenerate {
            norm: norm0.to_f64().unwrap_or(0.0),
        });
    }
    let d = r::<T>(ge.map().degree() as f64);
    let mut log_norm = num_traits::Float::ln(norm0);
    let mut point = ProjPoint::normalize(lift)?;
    for _ in 0..iterations {
        let image = ge.map().eval_lift(point.lift());
        let norm = lift_norm(&image);
        if norm < r::<T>(1e-300) {
            return Err(Error::Degenerate {
                norm: norm.to_f64().unwrap_or(0.0),
            });
        }
        log_norm = d * log_norm + num_traits::Float::ln(norm);
        point = ProjPoint::normalize(image)?;
    }
    Ok(ge.green(&point)?.0 + log_norm)
}

/// The point γᵢ(param) on the i-fold image curve (used by the sampler).
pub fn curve_point<T: Real>(
    map: &HomogeneousEndomorphism<T>,
    line: &ProjectiveLine<T>,
    iterations: usize,
    chart: ParamChart,
    param: Complex<T>,
) -> Result<ProjPoint<T>> {
    let lift = match chart {
        ParamChart::Finite => line.lift_at(param),
        ParamChart::Infinity => line.lift_at_infinity_chart(param),
    };
    let mut point = ProjPoint::normalize(lift)?;
    for _ in 0..iterations {
        point = map.apply(&point)?;
    }
    Ok(point)
}

/// Slice density of T along the i-fold forward image of a line.
///
/// The parameter sphere is covered by the charts |ζ| ≤ 1 and |η| < 1,
/// each with a one-stencil margin; the density per owned cell is the
/// five-point Laplacian of the curve potential divided by 2π. Negative
/// cells (discretization artifacts of a continuous but not C²
/// potential) are clipped and the density renormalized to the algebraic
/// total; a clipped fraction above 1% reports `MassDefect`.
pub fn line_slice_density<T: Real>(
    ge: &GreenEvaluator<T>,
    line: &ProjectiveLine<T>,
    iterations: usize,
    grid_size: usize,
) -> Result<SliceDensity<T>> {
    if grid_size < 64 {
        return Err(Error::InvalidInput(format!(
            "grid_size must be >= 64 to resolve the curve, got {grid_size}"
        )));
    }
    let n = grid_size;
    let extent = r::<T>(CHART_EXTENT);
    let h = r::<T>(2.0 * CHART_EXTENT / n as f64);
    let node = |j: usize| -> T { -extent + h * r::<T>(j as f64 + 0.5) };

    let mut cells: Vec<SliceCell<T>> = Vec::new();
    let two_pi = r::<T>(2.0) * T::PI();

    for chart in [ParamChart::Finite, ParamChart::Infinity] {
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|row| {
                (0..n)
                    .map(|col| {
                        let param = Complex::new(node(col), node(row));
                        let lift = match chart {
                            ParamChart::Finite => line.lift_at(param),
                            ParamChart::Infinity => line.lift_at_infinity_chart(param),
                        };
                        curve_potential(ge, iterations, lift).unwrap_or_else(|_| T::zero())
                    })
                    .collect()
            })
            .collect();

        for row in 1..n - 1 {
            for col in 1..n - 1 {
                let center = Complex::new(node(col), node(row));
                let owned = match chart {
                    ParamChart::Finite => center.norm() <= T::one(),
                    ParamChart::Infinity => center.norm() < T::one(),
                };
                if !owned {
                    continue;
                }
                let stencil = rows[row][col + 1]
                    + rows[row][col - 1]
                    + rows[row + 1][col]
                    + rows[row - 1][col]
                    - r::<T>(4.0) * rows[row][col];
                cells.push(SliceCell {
                    chart,
                    center,
                    weight: stencil / two_pi,
                });
            }
        }
    }

    let algebraic_total: T = cells.iter().map(|c| c.weight).fold(T::zero(), |a, b| a + b);
    let negative_mass: T = cells
        .iter()
        .map(|c| fmax(T::zero(), -c.weight))
        .fold(T::zero(), |a, b| a + b);
    let clipped_fraction = if algebraic_total > T::zero() {
        negative_mass / algebraic_total
    } else {
        T::one()
    };
    if clipped_fraction > r::<T>(CLIP_LIMIT) {
        return Err(Error::MassDefect {
            clipped_fraction: clipped_fraction.to_f64().unwrap_or(f64::NAN),
            limit: CLIP_LIMIT,
        });
    }
    let mut positive_total = T::zero();
    for cell in cells.iter_mut() {
        if cell.weight < T::zero() {
            cell.weight = T::zero();
        }
        positive_total += cell.weight;
    }
    if positive_total > T::zero() {
        let factor = algebraic_total / positive_total;
        for cell in cells.iter_mut() {
            cell.weight *= factor;
        }
    }

    Ok(SliceDensity {
        grid_size: n,
        spacing: h,
        cells,
        total_mass: algebraic_total,
        clipped_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endo::{siegel_map, squaring_map};
    use crate::proj::chordal_distance;
    use crate::scalar::c;

    const GOLDEN_THETA: f64 = 0.6180339887498949;

    fn squaring_green(n_iter: usize) -> GreenEvaluator<f64> {
        GreenEvaluator::new(squaring_map::<f64>().endo().clone(), n_iter).unwrap()
    }

    /// Closed form for the squaring map: G = log max(|z|,|w|,|t|) on the
    /// unit lift.
    fn squaring_oracle(p: &ProjPoint<f64>) -> f64 {
        p.lift()
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .ln()
    }

    #[test]
    fn u_examples() {
        let f = squaring_map::<f64>();
        let basis = ProjPoint::normalize([c::<f64>(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(u_potential(f.endo(), &basis).unwrap().abs() < 1e-14);

        let sym = ProjPoint::normalize([c::<f64>(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let expected = -0.25 * 3.0f64.ln();
        assert!((u_potential(f.endo(), &sym).unwrap() - expected).abs() < 1e-14);

        let siegel = siegel_map::<f64>(GOLDEN_THETA);
        let origin = ProjPoint::from_affine(c(0.0, 0.0), c(0.0, 0.0));
        assert!(u_potential(siegel.endo(), &origin).unwrap().abs() < 1e-14);
    }

    #[test]
    fn green_geometric_series_at_fixed_direction() {
        let ge = squaring_green(40);
        let sym = ProjPoint::normalize([c::<f64>(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let (value, _) = ge.green(&sym).unwrap();
        let expected = -0.5 * 3.0f64.ln();
        assert!((value - expected).abs() < 1e-11, "value = {value}");
    }

    #[test]
    fn green_zero_iterations_rejected() {
        let map = squaring_map::<f64>().endo().clone();
        assert!(GreenEvaluator::new(map, 0).is_err());
    }

    #[test]
    fn green_matches_squaring_oracle() {
        let ge = squaring_green(25);
        let bound = ge.error_bound();
        for lift in quasi::unit_lifts::<f64>(1000) {
            let p = ProjPoint::normalize(lift).unwrap();
            let (value, _) = ge.green(&p).unwrap();
            let oracle = squaring_oracle(&p);
            assert!(
                (value - oracle).abs() <= bound,
                "|{value} - {oracle}| > {bound}"
            );
        }
    }

    #[test]
    fn functional_equation_residual_within_bound() {
        let siegel = siegel_map::<f64>(GOLDEN_THETA);
        let ge = GreenEvaluator::new(siegel.endo().clone(), 25).unwrap();
        let limit = 3.0 * 2.0 * ge.error_bound();
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p = ProjPoint::from_affine(
                c(
                    2.0 * rng.random::<f64>() - 1.0,
                    2.0 * rng.random::<f64>() - 1.0,
                ),
                c(
                    2.0 * rng.random::<f64>() - 1.0,
                    2.0 * rng.random::<f64>() - 1.0,
                ),
            );
            let residual = ge.functional_equation_residual(&p).unwrap();
            assert!(residual <= limit, "residual {residual} > {limit}");
        }
    }

    #[test]
    fn green_is_bounded_by_tail_sum() {
        let ge = squaring_green(25);
        // |G| <= u_bound * d / (d - 1) = 2 u_bound for d = 2
        let limit = ge.u_bound() * 2.0;
        for lift in quasi::unit_lifts::<f64>(500) {
            let p = ProjPoint::normalize(lift).unwrap();
            let (value, _) = ge.green(&p).unwrap();
            assert!(value.abs() <= limit);
        }
    }

    pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn convergence_rate_slope() {
        let siegel = siegel_map::<f64>(GOLDEN_THETA);
        let ge = GreenEvaluator::new(siegel.endo().clone(), 26).unwrap();
        let mut max_diff = vec![0.0f64; 26];
        for lift in quasi::unit_lifts::<f64>(200) {
            let p = ProjPoint::normalize(lift).unwrap();
            let sums = ge.partial_sums(&p).unwrap();
            for n in 1..sums.len() {
                max_diff[n] = max_diff[n].max((sums[n] - sums[n - 1]).abs());
            }
        }
        let xs: Vec<f64> = (5..25).map(|n| n as f64).collect();
        let ys: Vec<f64> = (5..25).map(|n| max_diff[n].ln()).collect();
        let slope = least_squares_slope(&xs, &ys);
        let expected = -(2.0f64.ln());
        assert!(
            (slope - expected).abs() <= 0.1 * expected.abs(),
            "slope {slope} vs {expected}"
        );
    }

    #[test]
    fn slice_of_line_has_unit_mass() {
        let ge = squaring_green(20);
        let line = ProjectiveLine::horizontal(c(0.0, 0.0));
        let density = line_slice_density(&ge, &line, 0, 128).unwrap();
        let mass = density.total_mass();
        assert!((mass - 1.0).abs() <= 0.02, "mass = {mass}");
        assert!(density.clipped_fraction() <= 0.01);
    }

    /// 1D equilibrium oracle: for the squaring map the slice along
    /// {w = 0} is the uniform measure on the unit parameter circle.
    #[test]
    fn squaring_slice_concentrates_on_circle() {
        let ge = squaring_green(20);
        let line = ProjectiveLine::horizontal(c(0.0, 0.0));
        let density = line_slice_density(&ge, &line, 0, 256).unwrap();
        let mut near = 0.0f64;
        let mut total = 0.0f64;
        for cell in density.cells() {
            let zeta = match cell.chart {
                ParamChart::Finite => cell.center,
                ParamChart::Infinity => cell.center.inv(),
            };
            let point = ProjPoint::from_affine(zeta, c(0.0, 0.0));
            let on_circle = ProjPoint::from_affine(zeta / zeta.norm().max(1e-12), c(0.0, 0.0));
            if chordal_distance(&point, &on_circle) <= 0.05 {
                near += cell.weight;
            }
            total += cell.weight;
        }
        assert!(near / total >= 0.95, "near fraction {}", near / total);
    }

    /// Inversion ζ ↦ 1/ζ swaps the two parameter charts cell-for-cell,
    /// so the reparametrized density must match in total variation.
    #[test]
    fn slice_invariant_under_inversion_reparam() {
        let ge = squaring_green(18);
        let p = ProjPoint::from_affine(c(0.3, 0.1), c(-0.2, 0.4));
        let q = ProjPoint::from_affine(c(-0.6, 0.25), c(0.5, -0.3));
        let line = ProjectiveLine::through(&p, &q).unwrap();
        let swapped = ProjectiveLine::through(&q, &p).unwrap();
        let d1 = line_slice_density(&ge, &line, 1, 128).unwrap();
        let d2 = line_slice_density(&ge, &swapped, 1, 128).unwrap();

        use std::collections::HashMap;
        let key = |chart_finite: bool, center: Complex<f64>| {
            (
                chart_finite,
                (center.re * 1e6).round() as i64,
                (center.im * 1e6).round() as i64,
            )
        };
        let mut lookup = HashMap::new();
        for cell in d2.cells() {
            let fin = cell.chart == ParamChart::Finite;
            lookup.insert(key(!fin, cell.center), cell.weight);
        }
        let mut tv = 0.0f64;
        for cell in d1.cells() {
            let fin = cell.chart == ParamChart::Finite;
            let other = lookup.get(&key(fin, cell.center)).copied().unwrap_or(0.0);
            tv += (cell.weight - other).abs();
        }
        tv /= 2.0 * d1.total_mass();
        assert!(tv <= 0.02, "total variation {tv}");
    }

    /// General Möbius reparametrization compared through an integral of a
    /// smooth observable of the curve point.
    #[test]
    fn slice_invariant_under_moebius_integrals() {
        let ge = squaring_green(18);
        let line = ProjectiveLine::horizontal(c(0.0, 0.0));
        let reparam = line.moebius_reparam(
            c::<f64>(0.8, 0.3),
            c::<f64>(0.1, -0.2),
            c::<f64>(0.05, 0.1),
            c::<f64>(1.0, 0.0),
        );
        let d1 = line_slice_density(&ge, &line, 0, 128).unwrap();
        let d2 = line_slice_density(&ge, &reparam, 0, 128).unwrap();
        let observable = |pt: &ProjPoint<f64>| -> f64 {
            let z = pt.lift()[0] / pt.lift()[2];
            (z / (1.0 + z.norm())).re
        };
        let integrate = |density: &SliceDensity<f64>, l: &ProjectiveLine<f64>| -> f64 {
            let mut acc = 0.0;
            for cell in density.cells() {
                let pt = curve_point(ge.map(), l, 0, cell.chart, cell.center).unwrap();
                acc += cell.weight * observable(&pt);
            }
            acc / density.total_mass()
        };
        let i1 = integrate(&d1, &line);
        let i2 = integrate(&d2, &reparam);
        assert!((i1 - i2).abs() <= 0.02, "{i1} vs {i2}");
    }
}
