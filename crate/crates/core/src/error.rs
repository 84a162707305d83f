//! Error type shared across the library.
//!
//! Every fallible operation returns [`HtmError`]. The CLI maps errors to
//! process exit codes via [`HtmError::exit_code`]: data problems exit 2,
//! configuration problems exit 3, everything else exits 1.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HtmError>;

#[derive(Debug, Error)]
pub enum HtmError {
    /// Two bit vectors that must share a width do not.
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    /// A selection operation received an empty score sequence.
    #[error("empty score sequence")]
    EmptyScores,

    /// A configuration field is missing, malformed, or out of range.
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Input data is malformed (bad CSV cell, ragged rows, empty file, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A metric has no defined value for the given inputs (for example MAPE
    /// when every truth term is zero).
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    /// A prediction was requested before anything was learned.
    #[error("recognition store is empty; nothing has been learned")]
    EmptyStore,

    /// Two recognition units were ingested with the same id.
    #[error("duplicate recognition unit id {0}")]
    DuplicateUnit(u64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl HtmError {
    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HtmError::Data(_)
            | HtmError::UndefinedMetric(_)
            | HtmError::Io(_)
            | HtmError::Serde(_) => 2,
            HtmError::Config { .. } => 3,
            _ => 1,
        }
    }

    /// Shorthand for a configuration error.
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HtmError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
