use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("block size {m} out of range 1..={n}")]
    BlockSize { m: usize, n: usize },

    #[error("degenerate bias-correction denominator (m={m}, m'={m_prime}, rho={rho}): {value:e}")]
    DegenerateDenominator {
        m: usize,
        m_prime: usize,
        rho: f64,
        value: f64,
    },

    #[error("singular moment matrix for block set {block_set:?} (condition number {condition:e})")]
    SingularMoments { block_set: Vec<usize>, condition: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("no ground truth: {0}")]
    NoGroundTruth(String),

    #[error("estimate undefined: {0}")]
    Undefined(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
