use thiserror::Error;

/// Errors produced by the enhancement library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty image")]
    EmptyImage,

    #[error("non-finite input")]
    NonFiniteInput,

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("image too large for dense reference: {pixels} pixels (max {max})")]
    TooLarge { pixels: usize, max: usize },

    #[error("unsupported channel count: {0}")]
    UnsupportedChannels(usize),

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("empty grid")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
