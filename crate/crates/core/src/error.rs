use thiserror::Error;

/// Errors raised by the radar model, dictionaries, solvers and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid radar configuration: {0}")]
    InvalidConfig(String),

    #[error("target {index} lies outside the parameter domain: {reason}")]
    TargetOutOfDomain { index: usize, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("measurement has {got} samples, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("duplicate pick at position {0}: identical columns make the Gram matrix singular")]
    DuplicatePick(usize),

    #[error("exact-model dictionary was not built; required by {0}")]
    MissingExactDictionary(&'static str),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
