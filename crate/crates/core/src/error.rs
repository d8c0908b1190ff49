use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("enumeration too large: {0}")]
    TooLarge(String),

    #[error("degenerate quantization: {0}")]
    Degenerate(String),

    #[error("sample count {got} below the minimum of {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("missing data: {0}")]
    Missing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
