use thiserror::Error;

/// Errors raised by the polynomial algebra, decomposition and detection routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("input is not para-Hermitian (max lag deviation {0:e})")]
    NotParaHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A covariance that has to be inverted is numerically singular.
    #[error("ill-conditioned covariance (condition number {0:e})")]
    IllConditioned(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
