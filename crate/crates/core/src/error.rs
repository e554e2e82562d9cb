use thiserror::Error;

/// Errors raised by the curvature engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("map does not send Ker b_V into Ker b_W (kernel residual {residual:.3e})")]
    NoAdjoint { residual: f64 },

    #[error("quotient map is not surjective (rank {rank} < {rows})")]
    NotSurjective { rank: usize, rows: usize },

    #[error("form is not positive-definite (smallest/largest eigenvalue ratio {ratio:.3e})")]
    NotPositive { ratio: f64 },

    #[error("metric is not positive-definite at the evaluation point")]
    NotPositiveAtPoint,

    #[error("zero or null direction vector")]
    ZeroVector,

    #[error("stencil point leaves the chart domain (coordinate {coord}, distance {distance:.4} > radius {radius:.4})")]
    OutOfDomain {
        coord: usize,
        distance: f64,
        radius: f64,
    },

    #[error("rank jump near the evaluation point (rank {center} at center, {neighbor} nearby)")]
    RankJump { center: usize, neighbor: usize },

    #[error("compatibility residual {residual:.3e} exceeds solver tolerance {tol:.1e}: dG is not in the column space of G")]
    SolverResidual { residual: f64, tol: f64 },

    #[error("map is not holomorphic (d-bar residual {residual:.3e})")]
    NotHolomorphic { residual: f64 },

    #[error("analytic derivatives disagree with finite differences (relative error {rel:.3e})")]
    DerivativeMismatch { rel: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown model id `{0}`")]
    UnknownModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;
