//! Crate-wide error type.
//!
//! Exit-code mapping for the CLI lives in `main.rs`: config problems map to 2,
//! verification failures to 1, everything else to 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    ShapeMismatch {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("forward cache does not match network: {0}")]
    CacheMismatch(String),

    #[error("non-finite value in {context} (first at index {index})")]
    NonFinite { context: String, index: usize },

    #[error("training diverged at epoch {epoch}: {what} is non-finite")]
    Diverged { epoch: usize, what: String },

    #[error("class mismatch: left dataset holds class {left}, right dataset holds class {right}")]
    ClassMismatch { left: usize, right: usize },

    #[error("class {class} absent from {which} dataset")]
    MissingClass { class: usize, which: String },

    #[error("class {class} has {have} samples, need at least {need}")]
    TooFewClassSamples {
        class: usize,
        have: usize,
        need: usize,
    },

    #[error("covariance for class {class} is not positive definite")]
    DegenerateCovariance { class: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("all {n} samples fall outside the grid bounds")]
    AllSamplesOutOfBounds { n: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("centroid solver produced a non-finite iterate at step {iterate}")]
    SolverDiverged { iterate: usize },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("config error{}: {message}", .line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    InvalidConfig { line: Option<usize>, message: String },

    #[error("malformed dataset file {path}: {message}")]
    MalformedDataset { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            line: None,
            message: message.into(),
        }
    }

    pub fn config_at(line: usize, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            line: Some(line),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
