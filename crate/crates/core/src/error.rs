use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("working precision of {0} digits is below the minimum of 30")]
    PrecisionTooLow(u32),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} is not a fundamental discriminant: {1}")]
    NotFundamental(i64, &'static str),

    #[error("root is not bracketed: f(lo) and f(hi) have the same sign")]
    NotBracketed,

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("precision fault: {0}")]
    PrecisionFault(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is numerically singular at pivot {0}")]
    Singular(usize),

    #[error("right-hand side is the zero vector")]
    ZeroRhs,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lasso did not converge at lambda = {lambda:e} after {sweeps} sweeps")]
    LassoNonConvergence { lambda: f64, sweeps: usize },

    #[error("located {found} zeros up to the last Gram point, expected {expected}")]
    ZeroCountMismatch { expected: usize, found: usize },

    #[error("cannot parse number: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
