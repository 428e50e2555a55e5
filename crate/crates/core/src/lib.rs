//! Numerical laboratory for holomorphic dynamics on ℙ²(ℂ).
//!
//! The crate is organised around the objects it computes:
//!
//! - [`proj`] — projective points, affine charts, the chordal metric;
//! - [`endo`] — homogeneous endomorphisms of ℙ², their chart Jacobians and
//!   preimages for coordinate-split maps;
//! - [`green`] — the dynamical Green potential with certified error bounds,
//!   and slice densities of the Green current along parametrized curves;
//! - [`measures`] — samplers for the equilibrium measure, sliced saddle
//!   measures, the rotation-invariant circle measure, and the Siegel
//!   linearization that underpins the latter;
//! - [`ergodic`] — Jacobian cocycles, Lyapunov exponents, Bowen-ball
//!   entropy, and the Ruelle inequality check;
//! - [`pesin`] — the Lipschitz graph transform through nearly diagonal
//!   local maps, with the certified contraction bound.
//!
//! All core math is generic over the scalar type through [`scalar::Real`];
//! concrete `f64` aliases are exported at the crate root.

pub mod endo;
pub mod ergodic;
pub mod error;
pub mod green;
pub mod linalg;
pub mod measures;
pub mod pesin;
pub mod poly;
pub mod proj;
pub mod quasi;
pub mod scalar;

pub use error::Error;
pub use scalar::Real;

use num_complex::Complex;

/// Default double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Projective point at double precision.
pub type ProjPoint64 = proj::ProjPoint<f64>;
/// Homogeneous endomorphism at double precision.
pub type Endomorphism64 = endo::HomogeneousEndomorphism<f64>;
/// Coordinate-split map at double precision.
pub type ProductMap64 = endo::ProductMap<f64>;
/// Green potential evaluator at double precision.
pub type GreenEvaluator64 = green::GreenEvaluator<f64>;
/// Weighted point cloud at double precision.
pub type EmpiricalMeasure64 = measures::EmpiricalMeasure<f64>;
/// Siegel linearization at double precision.
pub type SiegelLinearization64 = measures::SiegelLinearization<f64>;
/// Orbit cocycle at double precision.
pub type OrbitCocycle64 = ergodic::OrbitCocycle<f64>;
/// Local nearly-diagonal map at double precision.
pub type LocalDiagonalMap64 = pesin::LocalDiagonalMap<f64>;
/// Sampled Lipschitz graph at double precision.
pub type LipschitzGraph64 = pesin::LipschitzGraph<f64>;
