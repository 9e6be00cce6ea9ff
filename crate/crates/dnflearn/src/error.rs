use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("oracle budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
