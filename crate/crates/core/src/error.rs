use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid algebra ({invariant}): {detail}")]
    InvalidAlgebra { invariant: String, detail: String },

    #[error("invalid hypercomplex subspace: {0}")]
    InvalidSubspace(String),

    #[error("variable index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("singular evaluation at {0:?}")]
    Singularity(Vec<f64>),

    #[error("non-finite integrand value at node {point:?}")]
    NonFiniteIntegrand { point: Vec<f64> },

    #[error("non-finite function value at {0:?}")]
    NonFiniteValue(Vec<f64>),

    #[error("finite-difference step underflow (h = {0:e})")]
    StepUnderflow(f64),

    #[error("point {0:?} is not on the boundary")]
    NotOnBoundary(Vec<f64>),

    #[error("point {0:?} is not interior to the domain")]
    NotInterior(Vec<f64>),

    #[error("approach direction is tangential (|cos| = {0:.3e})")]
    TangentialDirection(f64),

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("unknown subspace preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
