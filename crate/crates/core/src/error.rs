use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dictionary index must be at least 1")]
    InvalidBasisIndex,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid model index: {0}")]
    InvalidModel(String),

    #[error("coefficients do not conform to the model: {0}")]
    NonConformal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the empty model has no design matrix")]
    EmptyModel,

    #[error("dataset has no observations")]
    EmptyDataset,

    #[error("no move is available (p = 1 and K = 1)")]
    NoAvailableMove,

    #[error("burn-in {burn_in} must be smaller than the number of iterations {iterations}")]
    BurnIn { burn_in: usize, iterations: usize },

    #[error("unknown simulation model {0} (expected 1, 2 or 3)")]
    UnknownSimModel(u8),
}

pub type Result<T> = std::result::Result<T, Error>;
