use thiserror::Error;

use crate::memory::MeasureMode;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at component {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("memory is empty")]
    EmptyMemory,

    #[error("memory measures {actual}, operation requires {expected}")]
    ModeMismatch {
        expected: MeasureMode,
        actual: MeasureMode,
    },

    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },

    #[error("metrics line {line}: {message}")]
    Metrics { line: usize, message: String },

    #[error("environment: {0}")]
    Env(String),

    #[error("training diverged at update {update}: {message}")]
    Diverged { update: u64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}
