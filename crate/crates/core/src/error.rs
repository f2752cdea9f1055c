use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the fatigue/reliability pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("root finder for {what} did not converge; last bracket [{lo:e}, {hi:e}]")]
    RootNotFound { what: &'static str, lo: f64, hi: f64 },

    #[error("conjugate gradient stopped after {iterations} iterations with relative residual {residual:e}")]
    Convergence { iterations: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("design violates constraints: {0}")]
    Constraint(String),

    #[error("meshing failed: {0}")]
    Mesh(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("design grids do not match: {0}")]
    GridMismatch(String),

    #[error("empty surface field")]
    EmptyField,

    #[error("malformed input in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
