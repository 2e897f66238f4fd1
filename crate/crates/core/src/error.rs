use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension limit exceeded: matrix side {side} is above the configured maximum {max}")]
    DimensionLimit { side: usize, max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("operator is not Hermitian (max deviation {deviation:e}, allowed {allowed:e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("non-finite entry in operator data")]
    NonFinite,

    #[error("tridiagonal QL iteration did not converge")]
    NoConvergence,

    #[error("cannot parse map spec at `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("malformed map file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
