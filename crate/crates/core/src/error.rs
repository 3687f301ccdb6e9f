use thiserror::Error;

use crate::polyinv::PolyCoeffs;

#[derive(Debug, Error)]
pub enum LtbfError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, trace {trace:e})")]
    Indefinite { min_eigenvalue: f64, trace: f64 },

    #[error("interference covariance has min eigenvalue {0:e} < 1; inputs are inconsistent")]
    InconsistentInterference(f64),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("remez exchange did not converge after {iterations} iterations (best error {:e})", best.minimax_error)]
    RemezNonConvergence { iterations: usize, best: Box<PolyCoeffs> },

    #[error("SINR denominator {0:e} is not positive; covariance does not contain the user's own term")]
    NonPositiveDenominator(f64),

    #[error("zero-norm vector: {0}")]
    ZeroNorm(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LtbfError>;
