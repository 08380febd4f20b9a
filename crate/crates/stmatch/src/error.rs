use thiserror::Error;

/// Errors produced by construction, matching, generation, and classification.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point set is empty")]
    EmptyPointSet,

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point has a non-finite coordinate, saliency, or feature value")]
    NonFiniteValue,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("instance too large for exhaustive search: (S+1)^M = {size:.3e} exceeds {limit:.1e}")]
    OracleSizeExceeded { size: f64, limit: f64 },

    #[error("invalid perturbation spec: {0}")]
    InvalidSpec(String),

    #[error("prototype dictionary is empty")]
    EmptyDictionary,
}

pub type Result<T> = std::result::Result<T, Error>;
