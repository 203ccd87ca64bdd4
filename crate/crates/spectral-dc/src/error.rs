use thiserror::Error;

/// Failure modes shared by every routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("accuracy {eps:e} is below the precision floor {floor:e} for n = {n}")]
    PrecisionFloor { eps: f64, floor: f64, n: usize },
    #[error("target {target} lies within {delta:e} of source {source_index}")]
    SeparationViolation {
        target: usize,
        source_index: usize,
        delta: f64,
    },
    #[error("arrowhead core violates its deflation guarantees: {0}")]
    Desiderata(String),
    #[error("interlacing violated at root {0}")]
    Interlacing(usize),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("bulge state mismatch: {0}")]
    BulgeState(String),
    #[error("matrix is numerically rank deficient: {0}")]
    RankDeficient(String),
    #[error("iteration cap of {cap} reached: {what}")]
    IterationCap { cap: usize, what: String },
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
