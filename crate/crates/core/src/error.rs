use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical kernels and the orchestration layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Re omega <= 0 at contour node {index} (lambda = {lambda})")]
    BranchViolation { index: usize, lambda: Complex64 },

    #[error("non-finite integrand at lambda = {lambda}")]
    NonFinite { lambda: Complex64 },

    #[error("singular system in mode {mode}: {reason}")]
    Singular { mode: usize, reason: String },

    #[error("CFL violation: dt = {dt:.3e} exceeds limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("blowup detected at t = {t:.4}: energy grew by factor {factor:.2} in one step")]
    Blowup { t: f64, factor: f64 },

    #[error("incompatible initial data: {0}")]
    Incompatible(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}
