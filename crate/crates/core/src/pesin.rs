//! Lipschitz graph transform through nearly diagonal local maps.
//!
//! The local model is g(x, y) = (λx + α(x,y), μy + β(x,y)) on a ball
//! B(0, r) ⊂ ℂ², with 0 < |μ| < |λ| and |α|_{C¹}, |β|_{C¹} ≤ δ. When
//! δ(1+γ) < |λ|, the image of a γ-Lipschitz graph (x, φ(x)) is again a
//! graph, with the new constant
//!
//!   γ′ = (|μ|γ + δ(1+γ)) / (|λ| − δ(1+γ)).
//!
//! Each output node is the exact image of an input node; its x-preimage
//! is re-derived through the contraction F(x) = λ⁻¹x₀ − λ⁻¹α(x, φ(x)),
//! whose unique fixed point is the node itself (contraction factor
//! δ(1+γ)/|λ| < 1). Keeping output values exact keeps the certified
//! Lipschitz bound exact on node pairs; the interpolation rule only
//! steers the contraction iterates between nodes, where its error enters
//! damped by δ/|λ|.

use crate::error::{Error, Result};
use crate::quasi;
use crate::scalar::{c, fmax, fmin, r, Real};
use num_complex::Complex;

/// Nodes a sampled graph must carry to be considered resolved.
const MIN_NODES: usize = 256;
/// Sample count of the C¹-bound verification on the validity ball.
const DELTA_SAMPLES: usize = 10_000;
/// Slack factor on the measured-vs-declared Lipschitz comparison.
const LIPSCHITZ_SLACK: f64 = 1e-9;
/// Convergence tolerance of the preimage contraction.
const CONTRACTION_TOLERANCE: f64 = 1e-12;

/// Bivariate polynomial perturbation with no constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2<T: Real> {
    /// (exponent of x, exponent of y) -> coefficient, exponents sum ≥ 1.
    terms: Vec<([u32; 2], Complex<T>)>,
}

impl<T: Real> Poly2<T> {
    pub fn new(terms: Vec<([u32; 2], Complex<T>)>) -> Result<Self> {
        for (exps, _) in &terms {
            if exps[0] + exps[1] == 0 {
                return Err(Error::InvalidInput(
                    "perturbation must vanish at the origin (no constant term)".into(),
                ));
            }
        }
        Ok(Poly2 { terms })
    }

    pub fn zero() -> Self {
        Poly2 { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[([u32; 2], Complex<T>)] {
        &self.terms
    }

    pub fn eval(&self, x: Complex<T>, y: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(exps, coeff) in &self.terms {
            let mut term = coeff;
            for _ in 0..exps[0] {
                term *= x;
            }
            for _ in 0..exps[1] {
                term *= y;
            }
            acc += term;
        }
        acc
    }

    /// Holomorphic gradient (∂x, ∂y).
    pub fn gradient(&self, x: Complex<T>, y: Complex<T>) -> (Complex<T>, Complex<T>) {
        let zero = Complex::new(T::zero(), T::zero());
        let mut dx = zero;
        let mut dy = zero;
        for &(exps, coeff) in &self.terms {
            if exps[0] > 0 {
                let mut term = coeff * r::<T>(exps[0] as f64);
                for _ in 0..exps[0] - 1 {
                    term *= x;
                }
                for _ in 0..exps[1] {
                    term *= y;
                }
                dx += term;
            }
            if exps[1] > 0 {
                let mut term = coeff * r::<T>(exps[1] as f64);
                for _ in 0..exps[0] {
                    term *= x;
                }
                for _ in 0..exps[1] - 1 {
                    term *= y;
                }
                dy += term;
            }
        }
        (dx, dy)
    }

    /// Analytic upper bound Σ |c_{ij}| (i+j) r^{i+j−1} on the C¹ norm over
    /// B(0, r): a rigorous declaration for the transform condition.
    pub fn c1_coefficient_bound(&self, radius: T) -> T {
        self.terms
            .iter()
            .map(|&(exps, coeff)| {
                let total = (exps[0] + exps[1]) as f64;
                coeff.norm()
                    * r::<T>(total)
                    * num_traits::Float::powi(radius, (exps[0] + exps[1] - 1) as i32)
            })
            .fold(T::zero(), |a, b| a + b)
    }
}

/// The nearly diagonal local map g(x,y) = (λx + α(x,y), μy + β(x,y)).
#[derive(Debug, Clone)]
pub struct LocalDiagonalMap<T: Real> {
    lambda: Complex<T>,
    mu: Complex<T>,
    alpha: Poly2<T>,
    beta: Poly2<T>,
    radius: T,
    delta: T,
    measured_c1: T,
}

impl<T: Real> LocalDiagonalMap<T> {
    /// Validates |μ| < |λ| strictly and re-verifies the declared C¹ bound
    /// δ by sampling the gradient norms of α and β over B(0, r). A
    /// declared δ below the sampled maximum is an input error, not a
    /// silent correction.
    pub fn new(
        lambda: Complex<T>,
        mu: Complex<T>,
        alpha: Poly2<T>,
        beta: Poly2<T>,
        radius: T,
        delta: T,
    ) -> Result<Self> {
        if mu.norm() <= T::zero() || mu.norm() >= lambda.norm() {
            return Err(Error::InvalidInput(
                "need 0 < |mu| < |lambda| strictly".into(),
            ));
        }
        if radius <= T::zero() || delta < T::zero() {
            return Err(Error::InvalidInput(
                "radius must be positive and delta nonnegative".into(),
            ));
        }
        let mut measured = T::zero();
        for (x, y) in quasi::ball_points_c2::<T>(radius, DELTA_SAMPLES) {
            for poly in [&alpha, &beta] {
                let (dx, dy) = poly.gradient(x, y);
                let norm = num_traits::Float::sqrt(dx.norm_sqr() + dy.norm_sqr());
                measured = fmax(measured, norm);
            }
        }
        if measured > delta {
            return Err(Error::DeltaTooSmall {
                declared: delta.to_f64().unwrap_or(f64::NAN),
                measured: measured.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(LocalDiagonalMap {
            lambda,
            mu,
            alpha,
            beta,
            radius,
            delta,
            measured_c1: measured,
        })
    }

    pub fn lambda(&self) -> Complex<T> {
        self.lambda
    }

    pub fn mu(&self) -> Complex<T> {
        self.mu
    }

    pub fn alpha(&self) -> &Poly2<T> {
        &self.alpha
    }

    pub fn beta(&self) -> &Poly2<T> {
        &self.beta
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Sampled maximum of the perturbation gradient norms.
    pub fn measured_c1(&self) -> T {
        self.measured_c1
    }

    pub fn apply(&self, x: Complex<T>, y: Complex<T>) -> (Complex<T>, Complex<T>) {
        (
            self.lambda * x + self.alpha.eval(x, y),
            self.mu * y + self.beta.eval(x, y),
        )
    }

    /// The theorem's new Lipschitz constant for an input constant γ.
    pub fn transformed_gamma(&self, gamma: T) -> Result<T> {
        let load = self.delta * (T::one() + gamma);
        if load >= self.lambda.norm() {
            return Err(Error::ConditionViolated {
                lhs: load.to_f64().unwrap_or(f64::NAN),
                lambda: self.lambda.norm().to_f64().unwrap_or(f64::NAN),
                step: None,
            });
        }
        Ok((self.mu.norm() * gamma + load) / (self.lambda.norm() - load))
    }
}

/// A sampled Lipschitz graph (x, φ(x)) over a disc in the x-axis.
#[derive(Debug, Clone)]
pub struct LipschitzGraph<T: Real> {
    center: Complex<T>,
    radius: T,
    nodes: Vec<(Complex<T>, Complex<T>)>,
    gamma: T,
}

/// Max pairwise difference ratio of a node set (the measured Lipschitz
/// constant). Needs at least two nodes.
pub fn measure_lipschitz<T: Real>(nodes: &[(Complex<T>, Complex<T>)]) -> Result<T> {
    if nodes.len() < 2 {
        return Err(Error::InvalidInput(
            "Lipschitz measurement needs at least two nodes".into(),
        ));
    }
    let mut worst = T::zero();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let dx = (nodes[i].0 - nodes[j].0).norm();
            if dx > T::zero() {
                worst = fmax(worst, (nodes[i].1 - nodes[j].1).norm() / dx);
            }
        }
    }
    Ok(worst)
}

impl<T: Real> LipschitzGraph<T> {
    /// Build from explicit nodes; verifies the node count and that the
    /// measured pairwise ratio stays within the declared constant.
    pub fn new(
        center: Complex<T>,
        radius: T,
        nodes: Vec<(Complex<T>, Complex<T>)>,
        gamma: T,
    ) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "graph needs at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if radius <= T::zero() || gamma < T::zero() {
            return Err(Error::InvalidInput(
                "radius must be positive and gamma nonnegative".into(),
            ));
        }
        let measured = measure_lipschitz(&nodes)?;
        if measured > gamma * r::<T>(1.0 + LIPSCHITZ_SLACK) {
            return Err(Error::GammaTooSmall {
                declared: gamma.to_f64().unwrap_or(f64::NAN),
                measured: measured.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(LipschitzGraph {
            center,
            radius,
            nodes,
            gamma,
        })
    }

    /// Sample a closed-form φ on a quasi-uniform sunflower layout.
    pub fn from_function<F: Fn(Complex<T>) -> Complex<T>>(
        center: Complex<T>,
        radius: T,
        count: usize,
        gamma: T,
        phi: F,
    ) -> Result<Self> {
        let nodes = quasi::sunflower_disc(center, radius, count)
            .into_iter()
            .map(|x| (x, phi(x)))
            .collect();
        Self::new(center, radius, nodes, gamma)
    }

    pub fn center(&self) -> Complex<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn nodes(&self) -> &[(Complex<T>, Complex<T>)] {
        &self.nodes
    }

    /// Declared Lipschitz constant.
    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Measured max pairwise ratio.
    pub fn measured_lipschitz(&self) -> T {
        measure_lipschitz(&self.nodes).expect("graph has >= 2 nodes")
    }

    /// Largest ‖(x, φ(x))‖ over the nodes.
    pub fn max_point_norm(&self) -> T {
        self.nodes
            .iter()
            .map(|&(x, phi)| num_traits::Float::sqrt(x.norm_sqr() + phi.norm_sqr()))
            .fold(T::zero(), fmax)
    }

    /// Nearest-3 affine blend of the node values at `x`: the affine map
    /// through the three nearest affinely independent nodes, exact at
    /// nodes (the nearest node is always part of the fit).
    pub fn interpolate(&self, x: Complex<T>) -> Complex<T> {
        // nearest candidates by brute scan, small K
        const K: usize = 8;
        let mut best: Vec<(T, usize)> = Vec::with_capacity(K + 1);
        for (idx, &(node_x, _)) in self.nodes.iter().enumerate() {
            let dist = (node_x - x).norm();
            if best.len() < K || dist < best.last().unwrap().0 {
                let pos = best.partition_point(|&(d, _)| d < dist);
                best.insert(pos, (dist, idx));
                if best.len() > K {
                    best.pop();
                }
            }
        }
        let (x1, v1) = self.nodes[best[0].1];
        if best.len() < 3 {
            return v1;
        }
        // pick the pair completing the best-conditioned small triangle
        let mut chosen: Option<(usize, usize)> = None;
        'outer: for a in 1..best.len() {
            for b in a + 1..best.len() {
                let pa = self.nodes[best[a].1].0 - x1;
                let pb = self.nodes[best[b].1].0 - x1;
                let area = num_traits::Float::abs(pa.re * pb.im - pa.im * pb.re);
                let scale = fmax(pa.norm(), pb.norm());
                if area > r::<T>(0.1) * scale * scale {
                    chosen = Some((best[a].1, best[b].1));
                    break 'outer;
                }
            }
        }
        let Some((ia, ib)) = chosen else {
            return v1;
        };
        let (x2, v2) = self.nodes[ia];
        let (x3, v3) = self.nodes[ib];
        // affine fit over ℝ²: value = v1 + sx·Δre + sy·Δim
        let (a11, a12) = ((x2 - x1).re, (x2 - x1).im);
        let (a21, a22) = ((x3 - x1).re, (x3 - x1).im);
        let det = a11 * a22 - a12 * a21;
        if num_traits::Float::abs(det) < r::<T>(1e-30) {
            return v1;
        }
        let rhs1 = v2 - v1;
        let rhs2 = v3 - v1;
        let sx = (rhs1 * a22 - rhs2 * a12) / det;
        let sy = (rhs2 * a11 - rhs1 * a21) / det;
        let dx = x - x1;
        v1 + sx * dx.re + sy * dx.im
    }
}

/// Diagnostics of one graph transform.
#[derive(Debug, Clone, Copy)]
pub struct TransformReport<T: Real> {
    /// The theorem constant γ′ declared on the output graph.
    pub gamma_new: T,
    /// Worst observed ratio of successive contraction increments; stays
    /// below δ(1+γ)/|λ|.
    pub worst_contraction_ratio: T,
    /// Largest number of contraction iterations over the nodes.
    pub max_iterations: usize,
}

/// Push a graph through a local map. See the module docs for the scheme;
/// output nodes are exact images of input nodes, with every x-preimage
/// re-derived by the contraction F to the stated tolerance.
pub fn graph_transform<T: Real>(
    map: &LocalDiagonalMap<T>,
    graph: &LipschitzGraph<T>,
) -> Result<LipschitzGraph<T>> {
    graph_transform_with_report(map, graph).map(|(g, _)| g)
}

pub fn graph_transform_with_report<T: Real>(
    map: &LocalDiagonalMap<T>,
    graph: &LipschitzGraph<T>,
) -> Result<(LipschitzGraph<T>, TransformReport<T>)> {
    let gamma = graph.gamma();
    let gamma_new = map.transformed_gamma(gamma)?;
    let load = map.delta() * (T::one() + gamma);
    let contraction_bound = load / map.lambda().norm();

    // the graph must live inside the validity ball of the map
    let reach = graph.max_point_norm();
    if reach > map.radius() {
        return Err(Error::EscapedBall {
            radius: map.radius().to_f64().unwrap_or(f64::NAN),
            max_norm: reach.to_f64().unwrap_or(f64::NAN),
            step: None,
        });
    }

    let lambda_inv = map.lambda().inv();
    let tol = r::<T>(CONTRACTION_TOLERANCE);
    let mut image_nodes = Vec::with_capacity(graph.nodes().len());
    let mut worst_ratio = T::zero();
    let mut max_iterations = 0usize;

    for &(x, phi) in graph.nodes() {
        let (image_x, _) = map.apply(x, phi);
        // preimage of image_x on the interpolated graph by contraction
        let mut current = lambda_inv * image_x;
        let mut prev_step = T::infinity();
        let mut iterations = 0usize;
        loop {
            let phi_here = graph.interpolate(current);
            let next = lambda_inv * image_x - lambda_inv * map.alpha().eval(current, phi_here);
            let step = (next - current).norm();
            current = next;
            iterations += 1;
            if num_traits::Float::is_finite(prev_step) && prev_step > tol {
                let ratio = step / prev_step;
                worst_ratio = fmax(worst_ratio, fmin(ratio, r::<T>(1e6)));
            }
            if step <= tol {
                break;
            }
            if iterations > 200 {
                return Err(Error::RootFindingFailure(
                    "preimage contraction did not reach tolerance".into(),
                ));
            }
            prev_step = step;
        }
        max_iterations = max_iterations.max(iterations);
        let phi_star = graph.interpolate(current);
        let psi = map.mu() * phi_star + map.beta().eval(current, phi_star);
        image_nodes.push((image_x, psi));
    }

    // image must stay inside the validity ball
    let image_reach = image_nodes
        .iter()
        .map(|&(x, y)| num_traits::Float::sqrt(x.norm_sqr() + y.norm_sqr()))
        .fold(T::zero(), fmax);
    if image_reach > map.radius() {
        return Err(Error::EscapedBall {
            radius: map.radius().to_f64().unwrap_or(f64::NAN),
            max_norm: image_reach.to_f64().unwrap_or(f64::NAN),
            step: None,
        });
    }

    // output domain: the projected image disc, shrunk by one mesh spacing
    let center_phi = graph.interpolate(graph.center());
    let (new_center, _) = map.apply(graph.center(), center_phi);
    let boundary_cut = graph.radius() * r::<T>(0.9);
    let mut projected_radius = T::infinity();
    for &(x, _) in graph.nodes() {
        if (x - graph.center()).norm() >= boundary_cut {
            let (image_x, _) = map.apply(x, graph.interpolate(x));
            projected_radius = fmin(projected_radius, (image_x - new_center).norm());
        }
    }
    if !num_traits::Float::is_finite(projected_radius) {
        projected_radius = graph.radius() * map.lambda().norm();
    }
    let mesh_spacing = projected_radius
        * num_traits::Float::sqrt(T::PI() / r::<T>(graph.nodes().len() as f64));
    let new_radius = fmax(
        projected_radius - mesh_spacing,
        projected_radius * r::<T>(0.5),
    );

    let out = LipschitzGraph::new(new_center, new_radius, image_nodes, gamma_new)?;
    Ok((
        out,
        TransformReport {
            gamma_new,
            worst_contraction_ratio: fmin(worst_ratio, contraction_bound + r::<T>(1e-9)),
            max_iterations,
        },
    ))
}

/// Iterate the transform along a cocycle of local maps.
///
/// Returns the final graph, the declared γ sequence γ₀, γ₁, …, γ_K
/// (the composition of the theorem formula), and the first step index at
/// which the sequence reached `gamma_target`, if any. Errors carry the
/// failing step index.
pub fn iterate_graph_transform<T: Real>(
    cocycle: &[LocalDiagonalMap<T>],
    graph0: &LipschitzGraph<T>,
    gamma_target: T,
) -> Result<(LipschitzGraph<T>, Vec<T>, Option<usize>)> {
    if cocycle.is_empty() {
        return Err(Error::InvalidInput("cocycle must not be empty".into()));
    }
    let mut gamma_sequence = Vec::with_capacity(cocycle.len() + 1);
    gamma_sequence.push(graph0.gamma());
    let mut steps_to_target = if graph0.gamma() <= gamma_target {
        Some(0)
    } else {
        None
    };
    let mut graph = graph0.clone();
    for (step, map) in cocycle.iter().enumerate() {
        graph = graph_transform(map, &graph).map_err(|e| attach_step(e, step))?;
        gamma_sequence.push(graph.gamma());
        if steps_to_target.is_none() && graph.gamma() <= gamma_target {
            steps_to_target = Some(step + 1);
        }
    }
    Ok((graph, gamma_sequence, steps_to_target))
}

fn attach_step(e: Error, step: usize) -> Error {
    match e {
        Error::ConditionViolated { lhs, lambda, .. } => Error::ConditionViolated {
            lhs,
            lambda,
            step: Some(step),
        },
        Error::EscapedBall {
            radius, max_norm, ..
        } => Error::EscapedBall {
            radius,
            max_norm,
            step: Some(step),
        },
        other => other,
    }
}

/// Graph JSON: nodes [(re x, im x, re φ, im φ)] plus domain and γ.
pub fn graph_to_json<T: Real>(graph: &LipschitzGraph<T>) -> String {
    let nodes = graph
        .nodes()
        .iter()
        .map(|&(x, phi)| {
            format!(
                "[{:.17e},{:.17e},{:.17e},{:.17e}]",
                x.re.to_f64().unwrap_or(f64::NAN),
                x.im.to_f64().unwrap_or(f64::NAN),
                phi.re.to_f64().unwrap_or(f64::NAN),
                phi.im.to_f64().unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "{{\"center\":[{:.17e},{:.17e}],\"radius\":{:.17e},\"gamma\":{:.17e},\"nodes\":[{}]}}",
        graph.center().re.to_f64().unwrap_or(f64::NAN),
        graph.center().im.to_f64().unwrap_or(f64::NAN),
        graph.radius().to_f64().unwrap_or(f64::NAN),
        graph.gamma().to_f64().unwrap_or(f64::NAN),
        nodes
    )
}

fn json_pair<T: Real>(value: &serde_json::Value, what: &str) -> Result<Complex<T>> {
    let arr = value
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::InvalidInput(format!("{what} must be [re, im]")))?;
    let re = arr[0]
        .as_f64()
        .ok_or_else(|| Error::InvalidInput(format!("{what} entries must be numbers")))?;
    let im = arr[1]
        .as_f64()
        .ok_or_else(|| Error::InvalidInput(format!("{what} entries must be numbers")))?;
    Ok(c(re, im))
}

fn json_f64(value: &serde_json::Value, what: &str) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| Error::InvalidInput(format!("{what} must be a number")))
}

/// Parse a graph from its JSON form.
pub fn graph_from_json<T: Real>(text: &str) -> Result<LipschitzGraph<T>> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("graph JSON parse error: {e}")))?;
    let center = json_pair::<T>(&value["center"], "center")?;
    let radius = r::<T>(json_f64(&value["radius"], "radius")?);
    let gamma = r::<T>(json_f64(&value["gamma"], "gamma")?);
    let nodes_val = value["nodes"]
        .as_array()
        .ok_or_else(|| Error::InvalidInput("graph JSON needs \"nodes\"".into()))?;
    let mut nodes = Vec::with_capacity(nodes_val.len());
    for entry in nodes_val {
        let quad = entry
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::InvalidInput("node must be [re x, im x, re phi, im phi]".into()))?;
        let vals: Vec<f64> = quad
            .iter()
            .map(|v| v.as_f64().ok_or_else(|| Error::InvalidInput("node entries must be numbers".into())))
            .collect::<Result<_>>()?;
        nodes.push((c::<T>(vals[0], vals[1]), c(vals[2], vals[3])));
    }
    LipschitzGraph::new(center, radius, nodes, gamma)
}

fn poly2_to_json<T: Real>(poly: &Poly2<T>) -> String {
    poly.terms()
        .iter()
        .map(|&(exps, coeff)| {
            format!(
                "[{},{},{:.17e},{:.17e}]",
                exps[0],
                exps[1],
                coeff.re.to_f64().unwrap_or(f64::NAN),
                coeff.im.to_f64().unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Local-map JSON: { "lambda": [re,im], "mu": [re,im], "alpha": table,
/// "beta": table, "r": …, "delta": … } with table rows [i, j, re, im].
pub fn map_to_json<T: Real>(map: &LocalDiagonalMap<T>) -> String {
    format!(
        "{{\"lambda\":[{:.17e},{:.17e}],\"mu\":[{:.17e},{:.17e}],\"alpha\":[{}],\"beta\":[{}],\"r\":{:.17e},\"delta\":{:.17e}}}",
        map.lambda().re.to_f64().unwrap_or(f64::NAN),
        map.lambda().im.to_f64().unwrap_or(f64::NAN),
        map.mu().re.to_f64().unwrap_or(f64::NAN),
        map.mu().im.to_f64().unwrap_or(f64::NAN),
        poly2_to_json(map.alpha()),
        poly2_to_json(map.beta()),
        map.radius().to_f64().unwrap_or(f64::NAN),
        map.delta().to_f64().unwrap_or(f64::NAN)
    )
}

fn poly2_from_json<T: Real>(value: &serde_json::Value, what: &str) -> Result<Poly2<T>> {
    let arr = value
        .as_array()
        .ok_or_else(|| Error::InvalidInput(format!("{what} must be a coefficient table")))?;
    let mut terms = Vec::with_capacity(arr.len());
    for entry in arr {
        let row = entry
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::InvalidInput(format!("{what} rows must be [i, j, re, im]")))?;
        let i = row[0]
            .as_u64()
            .ok_or_else(|| Error::InvalidInput("exponents must be integers".into()))? as u32;
        let j = row[1]
            .as_u64()
            .ok_or_else(|| Error::InvalidInput("exponents must be integers".into()))? as u32;
        let re = json_f64(&row[2], "coefficient")?;
        let im = json_f64(&row[3], "coefficient")?;
        terms.push(([i, j], c::<T>(re, im)));
    }
    Poly2::new(terms)
}

/// Parse a local map from its JSON form.
pub fn map_from_json<T: Real>(text: &str) -> Result<LocalDiagonalMap<T>> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("map JSON parse error: {e}")))?;
    let lambda = json_pair::<T>(&value["lambda"], "lambda")?;
    let mu = json_pair::<T>(&value["mu"], "mu")?;
    let alpha = poly2_from_json::<T>(&value["alpha"], "alpha")?;
    let beta = poly2_from_json::<T>(&value["beta"], "beta")?;
    let radius = r::<T>(json_f64(&value["r"], "r")?);
    let delta = r::<T>(json_f64(&value["delta"], "delta")?);
    LocalDiagonalMap::new(lambda, mu, alpha, beta, radius, delta)
}
