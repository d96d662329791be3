use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the analysis, simulation and certification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("λ = {lambda} lies within tolerance of eigenvalue #{index} = {eigenvalue}")]
    SpectrumHit {
        lambda: Complex64,
        index: usize,
        eigenvalue: Complex64,
    },

    #[error("generator is not sectorial: eigenvalue #{index} = {eigenvalue} has re λ ≥ 0")]
    NotSectorial { index: usize, eigenvalue: Complex64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("step size fell below {min_step:e} at t = {time}; blow-up suspected")]
    BlowUpSuspected { time: f64, min_step: f64 },

    #[error("eigensolver residual {residual:e} exceeds {threshold:e}")]
    Eigensolver { residual: f64, threshold: f64 },

    #[error("missing graph norm for run {0}")]
    MissingGraphNorm(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
