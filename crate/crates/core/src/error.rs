use thiserror::Error;

/// Errors raised while building or evaluating geometric objects.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid gauge body: {0}")]
    InvalidGauge(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("zero direction")]
    ZeroDirection,

    #[error("negative scaling factor {0}")]
    NegativeScale(f64),

    #[error("unsupported kind: {0}")]
    UnsupportedKind(&'static str),

    #[error("set is unbounded")]
    Unbounded,

    #[error("{what} did not converge within {iters} iterations")]
    NoConvergence { what: &'static str, iters: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(GeomError::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}
