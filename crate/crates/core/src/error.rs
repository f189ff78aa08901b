use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Cholesky factorization failed even after the largest permitted jitter.
    #[error(
        "factorization failed for {size}x{size} matrix (diag range [{min_diag:e}, {max_diag:e}], \
         last jitter {jitter:e})"
    )]
    Numerical {
        size: usize,
        min_diag: f64,
        max_diag: f64,
        jitter: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
