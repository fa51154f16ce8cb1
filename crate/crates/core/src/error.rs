use thiserror::Error;

/// Errors raised by the detection pipeline and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series is empty")]
    Empty,

    #[error("series too short: {len} samples, at least {min} required")]
    TooShort { len: usize, min: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported Daubechies order {0} (expected 1..=10)")]
    UnsupportedOrder(usize),

    #[error("decomposition level {requested} exceeds maximum {max} for length {len}")]
    LevelTooHigh {
        requested: usize,
        max: usize,
        len: usize,
    },

    #[error("frequency index {k} is degenerate for padded length {len}")]
    DegenerateFrequency { k: usize, len: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
