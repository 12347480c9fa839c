use thiserror::Error;

/// Errors produced by channel construction, degrading and the oracles.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),

    #[error("invalid {field}: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("letter index {index} out of range for alphabet of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("cannot merge letter {0} with itself")]
    SameLetter(usize),

    #[error("need at least {needed} output letters, have {have}")]
    TooFewLetters { needed: usize, have: usize },

    #[error("target alphabet size must be at least 1")]
    ZeroTarget,

    #[error("bound not defined: {0}")]
    BoundRange(String),

    #[error("operation needs a binary-input channel, got {0} input letters")]
    NotBinary(usize),

    #[error("size guard: {0}")]
    Guard(String),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
