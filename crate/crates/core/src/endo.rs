//! Holomorphic endomorphisms of ℙ²: evaluation, chart Jacobians, and
//! preimages for coordinate-split maps.
//!
//! A map is stored as three homogeneous degree-d polynomials in (z, w, t).
//! Jacobians are taken between dehomogenization charts: the derivative of
//! `chart_dst ∘ f ∘ chart_src⁻¹` at the point, computed analytically from
//! the coefficient tables. Preimages are only solved for coordinate-split
//! ("product") maps, where they reduce to two univariate root problems;
//! general bivariate systems are out of scope and report `Unsupported`.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::poly::Poly;
use crate::proj::{chordal_distance, from_chart, to_chart, AffineChart, ProjPoint};
use crate::quasi;
use crate::scalar::{c, r, Real};
use num_complex::Complex;

/// Number of quasi-random unit lifts used by the nondegeneracy heuristic.
const NONDEGENERACY_SAMPLES: usize = 10_000;
/// Minimal max-component modulus of F(Z) tolerated on those lifts.
const NONDEGENERACY_FLOOR: f64 = 1e-8;
/// Forward-verification tolerance for computed preimages.
const PREIMAGE_TOLERANCE: f64 = 1e-8;

/// Homogeneous trivariate polynomial as a sparse coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly<T: Real> {
    degree: usize,
    /// (exponents of z, w, t) -> coefficient; exponents sum to `degree`.
    terms: Vec<([u32; 3], Complex<T>)>,
}

impl<T: Real> HomogeneousPoly<T> {
    pub fn new(degree: usize, terms: Vec<([u32; 3], Complex<T>)>) -> Result<Self> {
        for (exps, _) in &terms {
            let total: u32 = exps.iter().sum();
            if total as usize != degree {
                return Err(Error::InvalidInput(format!(
                    "monomial exponents {exps:?} do not sum to the degree {degree}"
                )));
            }
        }
        Ok(HomogeneousPoly { degree, terms })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[([u32; 3], Complex<T>)] {
        &self.terms
    }

    fn eval_with_powers(&self, powers: &[Vec<Complex<T>>; 3]) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(exps, coeff) in &self.terms {
            acc += coeff
                * powers[0][exps[0] as usize]
                * powers[1][exps[1] as usize]
                * powers[2][exps[2] as usize];
        }
        acc
    }

    fn gradient_with_powers(&self, powers: &[Vec<Complex<T>>; 3]) -> [Complex<T>; 3] {
        let zero = Complex::new(T::zero(), T::zero());
        let mut grad = [zero; 3];
        for &(exps, coeff) in &self.terms {
            for axis in 0..3 {
                if exps[axis] == 0 {
                    continue;
                }
                let mut term = coeff * r::<T>(exps[axis] as f64);
                for other in 0..3 {
                    let e = if other == axis {
                        exps[other] - 1
                    } else {
                        exps[other]
                    };
                    term *= powers[other][e as usize];
                }
                grad[axis] += term;
            }
        }
        grad
    }
}

fn power_table<T: Real>(z: Complex<T>, up_to: usize) -> Vec<Complex<T>> {
    let mut table = Vec::with_capacity(up_to + 1);
    let mut acc = Complex::new(T::one(), T::zero());
    table.push(acc);
    for _ in 0..up_to {
        acc *= z;
        table.push(acc);
    }
    table
}

/// A holomorphic endomorphism of ℙ² given by its polynomial lift
/// F = (P, Q, R) of common degree d ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousEndomorphism<T: Real> {
    degree: usize,
    components: [HomogeneousPoly<T>; 3],
}

impl<T: Real> HomogeneousEndomorphism<T> {
    /// Validates the exponent-sum invariant and runs the sampled
    /// nondegeneracy heuristic (F must not nearly vanish on unit lifts).
    pub fn new(degree: usize, components: [HomogeneousPoly<T>; 3]) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidInput(format!(
                "map degree must be >= 2, got {degree}"
            )));
        }
        for comp in &components {
            if comp.degree() != degree {
                return Err(Error::InvalidInput(
                    "all components must share the map degree".into(),
                ));
            }
        }
        let map = HomogeneousEndomorphism { degree, components };
        let floor = r::<T>(NONDEGENERACY_FLOOR);
        for lift in quasi::unit_lifts::<T>(NONDEGENERACY_SAMPLES) {
            let image = map.eval_lift(&lift);
            let max_component = image
                .iter()
                .map(|v| v.norm())
                .fold(T::zero(), crate::scalar::fmax);
            if max_component < floor {
                return Err(Error::Degenerate {
                    norm: max_component.to_f64().unwrap_or(0.0),
                });
            }
        }
        Ok(map)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[HomogeneousPoly<T>; 3] {
        &self.components
    }

    /// Raw lift evaluation F(Z) without normalization.
    pub fn eval_lift(&self, lift: &[Complex<T>; 3]) -> [Complex<T>; 3] {
        let powers = [
            power_table(lift[0], self.degree),
            power_table(lift[1], self.degree),
            power_table(lift[2], self.degree),
        ];
        [
            self.components[0].eval_with_powers(&powers),
            self.components[1].eval_with_powers(&powers),
            self.components[2].eval_with_powers(&powers),
        ]
    }

    /// 3×3 complex Jacobian of the lift at a point of ℂ³.
    pub fn lift_jacobian(&self, lift: &[Complex<T>; 3]) -> [[Complex<T>; 3]; 3] {
        let powers = [
            power_table(lift[0], self.degree),
            power_table(lift[1], self.degree),
            power_table(lift[2], self.degree),
        ];
        [
            self.components[0].gradient_with_powers(&powers),
            self.components[1].gradient_with_powers(&powers),
            self.components[2].gradient_with_powers(&powers),
        ]
    }

    /// Apply the map: normalize(F(Z)) for the stored unit lift Z.
    pub fn apply(&self, p: &ProjPoint<T>) -> Result<ProjPoint<T>> {
        let image = self.eval_lift(p.lift());
        let norm = crate::proj::lift_norm(&image);
        if norm < r::<T>(1e-12) {
            return Err(Error::Degenerate {
                norm: norm.to_f64().unwrap_or(0.0),
            });
        }
        ProjPoint::normalize(image)
    }

    /// Forward orbit p, f(p), …, f^n(p) (n+1 points).
    pub fn orbit(&self, p: &ProjPoint<T>, n: usize) -> Result<Vec<ProjPoint<T>>> {
        let mut points = Vec::with_capacity(n + 1);
        points.push(*p);
        for _ in 0..n {
            let next = self.apply(points.last().unwrap())?;
            points.push(next);
        }
        Ok(points)
    }

    /// Derivative of the chart expression `chart_dst ∘ f ∘ chart_src⁻¹`
    /// at `p`, as a 2×2 complex matrix.
    pub fn jacobian(
        &self,
        p: &ProjPoint<T>,
        chart_src: AffineChart,
        chart_dst: AffineChart,
    ) -> Result<Mat2<T>> {
        // chart applicability at both ends
        let _ = to_chart(p, chart_src)?;
        let fp = self.apply(p)?;
        let _ = to_chart(&fp, chart_dst)?;

        // canonical source lift L with 1 in the chart slot
        let pivot = p.lift()[chart_src.index()];
        let lift = [
            p.lift()[0] / pivot,
            p.lift()[1] / pivot,
            p.lift()[2] / pivot,
        ];
        let value = self.eval_lift(&lift);
        let jac3 = self.lift_jacobian(&lift);
        let (a, b) = chart_src.kept();
        Ok(project_to_chart(&value, &columns(&jac3, a, b), chart_dst))
    }

    /// Derivative of the chart expression of the n-th iterate, computed by
    /// pushing a 3×3 tangent frame along the orbit and projecting to the
    /// destination chart once at the end. Independent of the per-step
    /// 2×2 chart chaining, which makes it a useful consistency oracle.
    pub fn iterate_jacobian(
        &self,
        p: &ProjPoint<T>,
        n: usize,
        chart_src: AffineChart,
        chart_dst: AffineChart,
    ) -> Result<Mat2<T>> {
        let _ = to_chart(p, chart_src)?;
        let pivot = p.lift()[chart_src.index()];
        let mut state = [
            p.lift()[0] / pivot,
            p.lift()[1] / pivot,
            p.lift()[2] / pivot,
        ];
        let (a, b) = chart_src.kept();
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        // two tangent columns along the source chart directions
        let mut frame = [[zero; 2]; 3];
        frame[a][0] = one;
        frame[b][1] = one;

        for _ in 0..n {
            let jac3 = self.lift_jacobian(&state);
            let mut next_frame = [[zero; 2]; 3];
            for row in 0..3 {
                for col in 0..2 {
                    let mut acc = zero;
                    for k in 0..3 {
                        acc += jac3[row][k] * frame[k][col];
                    }
                    next_frame[row][col] = acc;
                }
            }
            let image = self.eval_lift(&state);
            let norm = crate::proj::lift_norm(&image);
            if norm < r::<T>(1e-12) {
                return Err(Error::Degenerate {
                    norm: norm.to_f64().unwrap_or(0.0),
                });
            }
            // scalar renormalization; the radial component is annihilated
            // by the final chart projection
            let inv = T::one() / norm;
            for row in 0..3 {
                state[row] = image[row] * inv;
                for col in 0..2 {
                    next_frame[row][col] = next_frame[row][col] * inv;
                }
            }
            frame = next_frame;
        }
        let final_point = ProjPoint::normalize(state)?;
        let _ = to_chart(&final_point, chart_dst)?;
        Ok(project_to_chart(&state, &frame, chart_dst))
    }
}

/// Extract two Jacobian columns as a 3×2 frame.
fn columns<T: Real>(jac3: &[[Complex<T>; 3]; 3], a: usize, b: usize) -> [[Complex<T>; 2]; 3] {
    let zero = Complex::new(T::zero(), T::zero());
    let mut frame = [[zero; 2]; 3];
    for row in 0..3 {
        frame[row][0] = jac3[row][a];
        frame[row][1] = jac3[row][b];
    }
    frame
}

/// d(dehomogenization) at `value` applied to a 3×2 tangent frame.
fn project_to_chart<T: Real>(
    value: &[Complex<T>; 3],
    frame: &[[Complex<T>; 2]; 3],
    chart: AffineChart,
) -> Mat2<T> {
    let m = chart.index();
    let (ca, cb) = chart.kept();
    let pivot = value[m];
    let inv = pivot.inv();
    let inv2 = inv * inv;
    // row for kept coordinate u: du = dV_u / V_m - V_u dV_m / V_m^2
    let row = |u: usize, col: usize| frame[u][col] * inv - value[u] * frame[m][col] * inv2;
    Mat2::new(row(ca, 0), row(ca, 1), row(cb, 0), row(cb, 1))
}

/// A coordinate-split map: f(z, w) = (p(z), q(w)) in the chart t = 1,
/// homogenized to ℙ².
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMap<T: Real> {
    p: Poly<T>,
    q: Poly<T>,
    map: HomogeneousEndomorphism<T>,
}

impl<T: Real> ProductMap<T> {
    /// Homogenize two univariate polynomials of equal degree d ≥ 2 into
    /// the product endomorphism [t^d p(z/t) : t^d q(w/t) : t^d].
    pub fn homogenize(p: Poly<T>, q: Poly<T>) -> Result<Self> {
        let d = p.degree();
        if d != q.degree() {
            return Err(Error::DegreeMismatch {
                p: d,
                q: q.degree(),
            });
        }
        if d < 2 {
            return Err(Error::InvalidInput(format!(
                "product map degree must be >= 2, got {d}"
            )));
        }
        if p.leading().norm_sqr() == T::zero() || q.leading().norm_sqr() == T::zero() {
            return Err(Error::InvalidInput(
                "leading coefficients must be nonzero".into(),
            ));
        }
        let comp_p = HomogeneousPoly::new(
            d,
            p.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, &coeff)| coeff.norm_sqr() != T::zero())
                .map(|(k, &coeff)| ([k as u32, 0, (d - k) as u32], coeff))
                .collect(),
        )?;
        let comp_q = HomogeneousPoly::new(
            d,
            q.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, &coeff)| coeff.norm_sqr() != T::zero())
                .map(|(k, &coeff)| ([0, k as u32, (d - k) as u32], coeff))
                .collect(),
        )?;
        let comp_r = HomogeneousPoly::new(d, vec![([0, 0, d as u32], c(1.0, 0.0))])?;
        let map = HomogeneousEndomorphism::new(d, [comp_p, comp_q, comp_r])?;
        Ok(ProductMap { p, q, map })
    }

    pub fn p(&self) -> &Poly<T> {
        &self.p
    }

    pub fn q(&self) -> &Poly<T> {
        &self.q
    }

    pub fn endo(&self) -> &HomogeneousEndomorphism<T> {
        &self.map
    }

    pub fn degree(&self) -> usize {
        self.map.degree()
    }

    pub fn apply(&self, point: &ProjPoint<T>) -> Result<ProjPoint<T>> {
        self.map.apply(point)
    }

    /// All d² preimages of a point in the chart t = 1, with multiplicity.
    ///
    /// Each candidate is verified by forward application; the multiplicity
    /// of a clustered root pair multiplies through.
    pub fn preimages(&self, q: &ProjPoint<T>) -> Result<Vec<(ProjPoint<T>, usize)>> {
        let t_chart = AffineChart::new(2);
        let (qz, qw) = to_chart(q, t_chart)?;

        let shift = |poly: &Poly<T>, target: Complex<T>| {
            let mut coeffs = poly.coeffs().to_vec();
            coeffs[0] -= target;
            Poly::new(coeffs)
        };
        let z_roots = shift(&self.p, qz).roots()?;
        let w_roots = shift(&self.q, qw).roots()?;

        let mut result = Vec::with_capacity(z_roots.len() * w_roots.len());
        for &(z, mz) in &z_roots {
            for &(w, mw) in &w_roots {
                let candidate = from_chart((z, w), t_chart);
                let forward = self.map.apply(&candidate)?;
                let miss = chordal_distance(&forward, q);
                if miss > r::<T>(PREIMAGE_TOLERANCE) {
                    return Err(Error::RootFindingFailure(format!(
                        "preimage misses target by chordal distance {}",
                        miss.to_f64().unwrap_or(f64::NAN)
                    )));
                }
                result.push((candidate, mz * mw));
            }
        }
        debug_assert_eq!(
            result.iter().map(|&(_, m)| m).sum::<usize>(),
            self.degree() * self.degree()
        );
        Ok(result)
    }
}

/// The squaring map [z² : w² : t²] as a product map.
pub fn squaring_map<T: Real>() -> ProductMap<T> {
    let square = Poly::from_f64_pairs(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
    ProductMap::homogenize(square.clone(), square).expect("squaring map is well formed")
}

/// The Siegel example [λzt + z² : λwt + w² : t²], with λ = e^{2πiθ}.
pub fn siegel_map<T: Real>(theta: T) -> ProductMap<T> {
    let lambda = rotation_multiplier(theta);
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let p = Poly::new(vec![zero, lambda, one]);
    ProductMap::homogenize(p.clone(), p).expect("Siegel map is well formed")
}

/// λ = e^{2πiθ}.
pub fn rotation_multiplier<T: Real>(theta: T) -> Complex<T> {
    let angle = r::<T>(2.0) * T::PI() * theta;
    Complex::new(num_traits::Float::cos(angle), num_traits::Float::sin(angle))
}

/// A parsed map definition: either coordinate-split (with its univariate
/// factors retained) or a general endomorphism.
#[derive(Debug, Clone)]
pub enum MapDefinition<T: Real> {
    Product(ProductMap<T>),
    General(HomogeneousEndomorphism<T>),
}

impl<T: Real> MapDefinition<T> {
    pub fn endo(&self) -> &HomogeneousEndomorphism<T> {
        match self {
            MapDefinition::Product(pm) => pm.endo(),
            MapDefinition::General(map) => map,
        }
    }

    pub fn as_product(&self) -> Option<&ProductMap<T>> {
        match self {
            MapDefinition::Product(pm) => Some(pm),
            MapDefinition::General(_) => None,
        }
    }

    pub fn degree(&self) -> usize {
        self.endo().degree()
    }
}

/// Parse the JSON map-definition format:
/// `{ "degree": d, "components": [[[i,j,k], re, im], ...] × 3 }` or
/// `{ "product": { "p": [[re,im],...], "q": [[re,im],...] } }`.
pub fn parse_map_json<T: Real>(text: &str) -> Result<MapDefinition<T>> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("map JSON parse error: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidInput("map JSON must be an object".into()))?;

    if let Some(product) = obj.get("product") {
        let read_poly = |key: &str| -> Result<Poly<T>> {
            let arr = product
                .get(key)
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::InvalidInput(format!("product map needs \"{key}\"")))?;
            let mut coeffs = Vec::with_capacity(arr.len());
            for entry in arr {
                let pair = entry
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::InvalidInput("coefficient must be [re, im]".into()))?;
                let re = pair[0].as_f64().ok_or_else(|| {
                    Error::InvalidInput("coefficient entries must be numbers".into())
                })?;
                let im = pair[1].as_f64().ok_or_else(|| {
                    Error::InvalidInput("coefficient entries must be numbers".into())
                })?;
                coeffs.push(c::<T>(re, im));
            }
            Ok(Poly::new(coeffs))
        };
        let p = read_poly("p")?;
        let q = read_poly("q")?;
        return Ok(MapDefinition::Product(ProductMap::homogenize(p, q)?));
    }

    let degree = obj
        .get("degree")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::InvalidInput("map JSON needs integer \"degree\"".into()))?
        as usize;
    let comps = obj
        .get("components")
        .and_then(|v| v.as_array())
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::InvalidInput("map JSON needs 3 \"components\"".into()))?;
    let mut parsed = Vec::with_capacity(3);
    for comp in comps {
        let entries = comp
            .as_array()
            .ok_or_else(|| Error::InvalidInput("component must be an array".into()))?;
        let mut terms = Vec::with_capacity(entries.len());
        for entry in entries {
            let triple = entry
                .as_array()
                .filter(|e| e.len() == 3)
                .ok_or_else(|| Error::InvalidInput("monomial must be [[i,j,k], re, im]".into()))?;
            let exps_arr = triple[0]
                .as_array()
                .filter(|e| e.len() == 3)
                .ok_or_else(|| Error::InvalidInput("exponents must be [i, j, k]".into()))?;
            let mut exps = [0u32; 3];
            for (slot, v) in exps.iter_mut().zip(exps_arr) {
                *slot = v
                    .as_u64()
                    .ok_or_else(|| Error::InvalidInput("exponents must be integers".into()))?
                    as u32;
            }
            let re = triple[1]
                .as_f64()
                .ok_or_else(|| Error::InvalidInput("coefficient re must be a number".into()))?;
            let im = triple[2]
                .as_f64()
                .ok_or_else(|| Error::InvalidInput("coefficient im must be a number".into()))?;
            terms.push((exps, c::<T>(re, im)));
        }
        parsed.push(HomogeneousPoly::new(degree, terms)?);
    }
    let [c0, c1, c2]: [HomogeneousPoly<T>; 3] = parsed.try_into().expect("length checked");
    Ok(MapDefinition::General(HomogeneousEndomorphism::new(
        degree,
        [c0, c1, c2],
    )?))
}

/// Canonical JSON serialization of a map definition (stable ordering,
/// full float precision); the CLI hashes these bytes.
pub fn canonical_map_json<T: Real>(map: &MapDefinition<T>) -> String {
    fn fmt_c<T: Real>(z: &Complex<T>) -> String {
        format!(
            "[{:.17e},{:.17e}]",
            z.re.to_f64().unwrap_or(f64::NAN),
            z.im.to_f64().unwrap_or(f64::NAN)
        )
    }
    match map {
        MapDefinition::Product(pm) => {
            let ser = |poly: &Poly<T>| {
                poly.coeffs()
                    .iter()
                    .map(fmt_c)
                    .collect::<Vec<_>>()
                    .join(",")
            };
            format!(
                "{{\"product\":{{\"p\":[{}],\"q\":[{}]}}}}",
                ser(pm.p()),
                ser(pm.q())
            )
        }
        MapDefinition::General(endo) => {
            let comps = endo
                .components()
                .iter()
                .map(|comp| {
                    let mut terms = comp.terms().to_vec();
                    terms.sort_by_key(|&(e, _)| e);
                    let inner = terms
                        .iter()
                        .map(|(e, coeff)| {
                            format!(
                                "[[{},{},{}],{}]",
                                e[0],
                                e[1],
                                e[2],
                                fmt_c(coeff).trim_start_matches('[').trim_end_matches(']')
                            )
                        })
                        .collect::<Vec<_>>()
                        .join(",");
                    format!("[{inner}]")
                })
                .collect::<Vec<_>>()
                .join(",");
            format!(
                "{{\"degree\":{},\"components\":[{}]}}",
                endo.degree(),
                comps
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn point(z: (f64, f64), w: (f64, f64), t: (f64, f64)) -> ProjPoint<f64> {
        ProjPoint::normalize([c(z.0, z.1), c(w.0, w.1), c(t.0, t.1)]).unwrap()
    }

    const GOLDEN_THETA: f64 = 0.6180339887498949; // (√5 − 1)/2

    #[test]
    fn squaring_apply_example() {
        let f = squaring_map::<f64>();
        let image = f.apply(&point((2.0, 0.0), (1.0, 0.0), (1.0, 0.0))).unwrap();
        let expected = point((4.0, 0.0), (1.0, 0.0), (1.0, 0.0));
        assert!(chordal_distance(&image, &expected) < 1e-14);
    }

    #[test]
    fn siegel_fixed_point_and_line_dynamics() {
        let f = siegel_map::<f64>(GOLDEN_THETA);
        let origin = point((0.0, 0.0), (0.0, 0.0), (1.0, 0.0));
        let image = f.apply(&origin).unwrap();
        assert!(chordal_distance(&image, &origin) < 1e-14);

        // the line z = a maps to z = R(a) with R(a) = λa + a²
        let lambda = rotation_multiplier(GOLDEN_THETA);
        let a = c::<f64>(0.03, -0.02);
        let start = ProjPoint::from_affine(a, c(0.0, 0.0));
        let image = f.apply(&start).unwrap();
        let expected = ProjPoint::from_affine(lambda * a + a * a, c(0.0, 0.0));
        assert!(chordal_distance(&image, &expected) < 1e-13);
    }

    #[test]
    fn squaring_jacobian_is_diag2() {
        let f = squaring_map::<f64>();
        let p = point((1.0, 0.0), (1.0, 0.0), (1.0, 0.0));
        let chart = AffineChart::new(2);
        let jac = f.endo().jacobian(&p, chart, chart).unwrap();
        assert!((jac.a - c::<f64>(2.0, 0.0)).norm() < 1e-12);
        assert!(jac.b.norm() < 1e-12);
        assert!(jac.c.norm() < 1e-12);
        assert!((jac.d - c::<f64>(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn siegel_jacobian_at_origin_is_diag_lambda() {
        let f = siegel_map::<f64>(GOLDEN_THETA);
        let lambda = rotation_multiplier(GOLDEN_THETA);
        let chart = AffineChart::new(2);
        let origin = point((0.0, 0.0), (0.0, 0.0), (1.0, 0.0));
        let jac = f.endo().jacobian(&origin, chart, chart).unwrap();
        assert!((jac.a - lambda).norm() < 1e-13);
        assert!((jac.d - lambda).norm() < 1e-13);
        assert!(jac.b.norm() < 1e-13);
        assert!(jac.c.norm() < 1e-13);
    }

    fn random_degree2_map(seed: u64) -> HomogeneousEndomorphism<f64> {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // dominant squaring part keeps the map nondegenerate
        let mut comps = Vec::new();
        for axis in 0..3usize {
            let mut terms = Vec::new();
            let mut lead = [0u32; 3];
            lead[axis] = 2;
            terms.push((lead, c::<f64>(1.0, 0.0)));
            for exps in [[1, 1, 0], [1, 0, 1], [0, 1, 1]] {
                terms.push((
                    exps,
                    c::<f64>(
                        0.2 * (rng.random::<f64>() - 0.5),
                        0.2 * (rng.random::<f64>() - 0.5),
                    ),
                ));
            }
            comps.push(HomogeneousPoly::new(2, terms).unwrap());
        }
        let [c0, c1, c2]: [HomogeneousPoly<f64>; 3] = comps.try_into().unwrap();
        HomogeneousEndomorphism::new(2, [c0, c1, c2]).unwrap()
    }

    /// Finite-difference oracle for the chart Jacobian.
    #[test]
    fn jacobian_matches_central_differences() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let f = random_degree2_map(7);
        let h = 1e-5;
        for _ in 0..25 {
            let p = ProjPoint::from_affine(
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            );
            let chart_src = p.best_chart();
            let fp = f.apply(&p).unwrap();
            let chart_dst = fp.best_chart();
            let jac = f.jacobian(&p, chart_src, chart_dst).unwrap();

            let base = to_chart(&p, chart_src).unwrap();
            let eval = |u: Complex<f64>, v: Complex<f64>| -> (Complex<f64>, Complex<f64>) {
                let q = from_chart((u, v), chart_src);
                to_chart(&f.apply(&q).unwrap(), chart_dst).unwrap()
            };
            let col_u = {
                let plus = eval(base.0 + h, base.1);
                let minus = eval(base.0 - h, base.1);
                (
                    (plus.0 - minus.0) / (2.0 * h),
                    (plus.1 - minus.1) / (2.0 * h),
                )
            };
            let col_v = {
                let plus = eval(base.0, base.1 + h);
                let minus = eval(base.0, base.1 - h);
                (
                    (plus.0 - minus.0) / (2.0 * h),
                    (plus.1 - minus.1) / (2.0 * h),
                )
            };
            let scale = jac.frob().max(1.0);
            assert!((jac.a - col_u.0).norm() / scale < 1e-5);
            assert!((jac.c - col_u.1).norm() / scale < 1e-5);
            assert!((jac.b - col_v.0).norm() / scale < 1e-5);
            assert!((jac.d - col_v.1).norm() / scale < 1e-5);
        }
    }

    /// Product of chained chart Jacobians vs the lifted-frame Jacobian of
    /// the iterate (two independent computational routes).
    #[test]
    fn cocycle_chain_rule_consistency() {
        let f = random_degree2_map(21);
        let mut p = ProjPoint::from_affine(c(0.31, 0.12), c(-0.2, 0.44));
        let n = 10;
        let mut charts = Vec::with_capacity(n + 1);
        let mut orbit = Vec::with_capacity(n + 1);
        orbit.push(p);
        charts.push(p.best_chart());
        for _ in 0..n {
            p = f.apply(&p).unwrap();
            orbit.push(p);
            charts.push(p.best_chart());
        }
        let mut product = Mat2::identity();
        for k in 0..n {
            let step = f.jacobian(&orbit[k], charts[k], charts[k + 1]).unwrap();
            product = step.mul(&product);
        }
        let direct = f
            .iterate_jacobian(&orbit[0], n, charts[0], charts[n])
            .unwrap();
        let diff = Mat2::new(
            product.a - direct.a,
            product.b - direct.b,
            product.c - direct.c,
            product.d - direct.d,
        );
        let rel = diff.frob() / direct.frob();
        assert!(rel < 1e-6, "relative deviation {rel}");
    }

    #[test]
    fn squaring_preimages_of_ones() {
        let f = squaring_map::<f64>();
        let target = ProjPoint::from_affine(c(1.0, 0.0), c(1.0, 0.0));
        let pre = f.preimages(&target).unwrap();
        assert_eq!(pre.iter().map(|&(_, m)| m).sum::<usize>(), 4);
        for sign_z in [-1.0, 1.0] {
            for sign_w in [-1.0, 1.0] {
                let expected = ProjPoint::from_affine(c(sign_z, 0.0), c(sign_w, 0.0));
                assert!(
                    pre.iter()
                        .any(|(pt, _)| chordal_distance(pt, &expected) < 1e-10),
                    "missing preimage ({sign_z}, {sign_w})"
                );
            }
        }
    }

    #[test]
    fn siegel_preimages_of_origin() {
        let f = siegel_map::<f64>(GOLDEN_THETA);
        let lambda = rotation_multiplier(GOLDEN_THETA);
        let target = ProjPoint::from_affine(c(0.0, 0.0), c(0.0, 0.0));
        let pre = f.preimages(&target).unwrap();
        assert_eq!(pre.iter().map(|&(_, m)| m).sum::<usize>(), 4);
        for z_root in [c::<f64>(0.0, 0.0), -lambda] {
            for w_root in [c::<f64>(0.0, 0.0), -lambda] {
                let expected = ProjPoint::from_affine(z_root, w_root);
                assert!(pre
                    .iter()
                    .any(|(pt, _)| chordal_distance(pt, &expected) < 1e-10));
            }
        }
    }

    /// Forward-evaluation oracle on a random product map.
    #[test]
    fn random_product_map_preimages_verified_forward() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rand_poly = |rng: &mut rand_chacha::ChaCha8Rng, d: usize| {
            let mut coeffs: Vec<_> = (0..=d)
                .map(|_| {
                    c::<f64>(
                        rng.random::<f64>() - 0.5,
                        rng.random::<f64>() - 0.5,
                    )
                })
                .collect();
            coeffs[d] += c(1.0, 0.0);
            Poly::new(coeffs)
        };
        for _ in 0..5 {
            let f =
                ProductMap::homogenize(rand_poly(&mut rng, 3), rand_poly(&mut rng, 3)).unwrap();
            let target = ProjPoint::from_affine(
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            );
            let pre = f.preimages(&target).unwrap();
            assert_eq!(pre.iter().map(|&(_, m)| m).sum::<usize>(), 9);
            for (candidate, _) in pre {
                let forward = f.apply(&candidate).unwrap();
                assert!(chordal_distance(&forward, &target) < 1e-8);
            }
        }
    }

    #[test]
    fn homogenize_examples() {
        // p = q = z² gives the squaring map
        let square = Poly::from_f64_pairs(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let f = ProductMap::homogenize(square.clone(), square.clone()).unwrap();
        assert_eq!(f.degree(), 2);

        // degree mismatch is rejected
        let cube = Poly::from_f64_pairs(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(
            ProductMap::homogenize(square, cube),
            Err(Error::DegreeMismatch { p: 2, q: 3 })
        ));
    }

    /// Functoriality at degree 2: f ∘ f evaluated pointwise matches the
    /// coefficientwise-composed map.
    #[test]
    fn composition_functoriality_degree2() {
        use std::collections::HashMap;

        let f = random_degree2_map(99);

        // test-only symbolic composition of homogeneous tables
        type Table = HashMap<[u32; 3], Complex<f64>>;
        fn table_of(poly: &HomogeneousPoly<f64>) -> Table {
            poly.terms().iter().copied().collect()
        }
        fn multiply(a: &Table, b: &Table) -> Table {
            let mut out = Table::new();
            for (ea, ca) in a {
                for (eb, cb) in b {
                    let key = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                    *out.entry(key).or_insert(c(0.0, 0.0)) += ca * cb;
                }
            }
            out
        }
        fn compose_component(comp: &HomogeneousPoly<f64>, images: &[Table; 3]) -> Table {
            let mut out = Table::new();
            for &(exps, coeff) in comp.terms() {
                let mut acc = Table::new();
                acc.insert([0, 0, 0], c(1.0, 0.0));
                for axis in 0..3 {
                    for _ in 0..exps[axis] {
                        acc = multiply(&acc, &images[axis]);
                    }
                }
                for (key, val) in acc {
                    *out.entry(key).or_insert(c(0.0, 0.0)) += coeff * val;
                }
            }
            out
        }

        let images = [
            table_of(&f.components()[0]),
            table_of(&f.components()[1]),
            table_of(&f.components()[2]),
        ];
        let composed: Vec<HomogeneousPoly<f64>> = (0..3)
            .map(|axis| {
                let table = compose_component(&f.components()[axis], &images);
                HomogeneousPoly::new(4, table.into_iter().collect()).unwrap()
            })
            .collect();
        let [c0, c1, c2]: [HomogeneousPoly<f64>; 3] = composed.try_into().unwrap();
        let f2 = HomogeneousEndomorphism::new(4, [c0, c1, c2]).unwrap();

        let p = ProjPoint::from_affine(c(0.2, -0.1), c(0.35, 0.15));
        let twice = f.apply(&f.apply(&p).unwrap()).unwrap();
        let once = f2.apply(&p).unwrap();
        assert!(chordal_distance(&twice, &once) < 1e-8);
    }

    #[test]
    fn map_json_roundtrip() {
        let def: MapDefinition<f64> = MapDefinition::Product(siegel_map(GOLDEN_THETA));
        let text = canonical_map_json(&def);
        let parsed = parse_map_json::<f64>(&text).unwrap();
        assert_eq!(canonical_map_json(&parsed), text);

        let general = format!(
            "{{\"degree\":2,\"components\":[[[[2,0,0],1.0,0.0]],[[[0,2,0],1.0,0.0]],[[[0,0,2],1.0,0.0]]]}}"
        );
        let parsed = parse_map_json::<f64>(&general).unwrap();
        assert!(parsed.as_product().is_none());
        let p = ProjPoint::from_affine(c(2.0, 0.0), c(1.0, 0.0));
        let image = parsed.endo().apply(&p).unwrap();
        let expected = ProjPoint::from_affine(c(4.0, 0.0), c(1.0, 0.0));
        assert!(chordal_distance(&image, &expected) < 1e-12);
    }

    #[test]
    fn exponent_sum_violation_rejected() {
        let bad = HomogeneousPoly::new(2, vec![([1, 0, 0], c::<f64>(1.0, 0.0))]);
        assert!(bad.is_err());
    }
}
