use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("variable index {index} out of range for dimension {n}")]
    VariableOutOfRange { index: usize, n: usize },

    #[error("expression is not polynomial: {0}")]
    NonPolynomial(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("step dtau={dtau} exceeds epsilon/5={limit}")]
    StepTooLarge { dtau: f64, limit: f64 },

    #[error("path {path} became non-finite at step {step}")]
    NonFinite { path: usize, step: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
