use thiserror::Error;

/// Errors raised by the rate evaluators, optimizers and the inequality engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid scheme parameters: {0}")]
    InvalidParams(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("unknown or overlapping labels: {0}")]
    Labels(String),

    /// A joint handed to a discrete theorem does not factor as required.
    #[error("factorization violated: {test} = {value:e} bits (tolerance {tolerance:e})")]
    Factorization { test: String, value: f64, tolerance: f64 },

    #[error("covariance is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid search box: {0}")]
    InvalidBox(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid inequality system: {0}")]
    InvalidSystem(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
