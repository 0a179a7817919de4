use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("column {column} is the zero vector and cannot be normalized")]
    ZeroColumn { column: usize },

    #[error("coherence computation over budget: p = {p} exceeds the limit of {budget} columns")]
    CoherenceOverBudget { p: usize, budget: usize },

    #[error("invalid operator parameters: {0}")]
    InvalidOperator(String),

    #[error("threshold parameter must be non-negative, got {0}")]
    NegativeLambda(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid theory parameters: {0}")]
    InvalidTheory(String),

    #[error("error bound undefined at zero coherence (mu * s = 0)")]
    ZeroCoherenceBound,

    #[error("iteration diverged (non-finite or exploding iterate) at lambda = {lambda:e}, inner iteration k = {k}")]
    Divergence { lambda: f64, k: usize },

    #[error("stepsize tau = {tau} outside (0, {limit}) where limit = 2 / ||Psi||^2")]
    StepsizeOutOfRange { tau: f64, limit: f64 },

    #[error("invalid problem parameters: {0}")]
    InvalidProblem(String),

    #[error("relative error undefined for an all-zero reference signal")]
    ZeroReference,

    #[error("invalid experiment specification: {0}")]
    InvalidExperiment(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
