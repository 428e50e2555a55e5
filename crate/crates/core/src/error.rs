//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong in the numerical laboratory.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A homogeneous lift was the zero vector (or not finite).
    #[error("zero or non-finite homogeneous lift")]
    ZeroVector,
    /// The requested affine chart degenerates at this point.
    #[error("chart {chart} is singular at this point (|coordinate| = {modulus})")]
    ChartSingular { chart: usize, modulus: f64 },
    /// The map evaluated to (almost) zero on a nonzero lift.
    #[error("degenerate evaluation: |F(Z)| = {norm} on a unit lift")]
    Degenerate { norm: f64 },
    /// Operation is only implemented for coordinate-split maps.
    #[error("operation requires a coordinate-split (product) map")]
    Unsupported,
    /// The univariate root solver failed to produce verified roots.
    #[error("root finding failed: {0}")]
    RootFindingFailure(String),
    /// Product-map construction from polynomials of different degrees.
    #[error("degree mismatch: deg p = {p}, deg q = {q}")]
    DegreeMismatch { p: usize, q: usize },
    /// A slice density lost more than the tolerated mass to clipping.
    #[error("slice density mass defect: clipped {clipped_fraction} of total mass (limit {limit})")]
    MassDefect { clipped_fraction: f64, limit: f64 },
    /// A small divisor |λ^k − λ| underflowed in the linearization recursion.
    #[error("small divisor overflow at order {order}: |lambda^k - lambda| = {modulus}")]
    SmallDivisorOverflow { order: usize, modulus: f64 },
    /// A circle orbit left the estimated Siegel disk.
    #[error("orbit escaped the Siegel disk at step {step} (|z| = {modulus})")]
    EscapedSiegelDisk { step: usize, modulus: f64 },
    /// Graph transform condition δ(1+γ) < |λ| violated.
    #[error("graph transform condition violated: delta (1+gamma) = {lhs} >= |lambda| = {lambda}{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    ConditionViolated {
        lhs: f64,
        lambda: f64,
        step: Option<usize>,
    },
    /// A graph (or its image) left the validity ball of the local map.
    #[error("graph left the validity ball B(0, {radius}): max point norm {max_norm}{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    EscapedBall {
        radius: f64,
        max_norm: f64,
        step: Option<usize>,
    },
    /// Declared C¹ bound smaller than the sampled gradient maximum.
    #[error("declared delta = {declared} is below the sampled C1 norm {measured}")]
    DeltaTooSmall { declared: f64, measured: f64 },
    /// Declared Lipschitz constant smaller than the measured node ratio.
    #[error("declared gamma = {declared} is below the measured Lipschitz ratio {measured}")]
    GammaTooSmall { declared: f64, measured: f64 },
    /// Catch-all for invalid user input (counts, ranges, parse problems).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable kind, used by the CLI JSON output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroVector => "ZeroVector",
            Error::ChartSingular { .. } => "ChartSingular",
            Error::Degenerate { .. } => "Degenerate",
            Error::Unsupported => "Unsupported",
            Error::RootFindingFailure(_) => "RootFindingFailure",
            Error::DegreeMismatch { .. } => "DegreeMismatch",
            Error::MassDefect { .. } => "MassDefect",
            Error::SmallDivisorOverflow { .. } => "SmallDivisorOverflow",
            Error::EscapedSiegelDisk { .. } => "EscapedSiegelDisk",
            Error::ConditionViolated { .. } => "ConditionViolated",
            Error::EscapedBall { .. } => "EscapedBall",
            Error::DeltaTooSmall { .. } => "DeltaTooSmall",
            Error::GammaTooSmall { .. } => "GammaTooSmall",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

/// Crate-local result alias.
pub type Result<T> = std::result::Result<T, Error>;
