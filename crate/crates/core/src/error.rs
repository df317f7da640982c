//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the toolkit's operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("column `{0}` already exists")]
    DuplicateColumn(String),

    #[error("column `{column}` has kind {found}, expected {expected}")]
    ColumnKind { column: String, expected: &'static str, found: &'static str },

    #[error("malformed timestamp `{0}`")]
    MalformedTimestamp(String),

    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(String),

    #[error("timestamps must be strictly increasing (row {0})")]
    UnsortedTimestamps(usize),

    #[error("column `{column}` has {found} rows, expected {expected}")]
    LengthMismatch { column: String, expected: usize, found: usize },

    #[error("column `{0}` contains no values")]
    AllMissing(String),

    #[error("column `{0}` starts with a missing value")]
    LeadingMissing(String),

    #[error("column `{column}` has a missing value at row {row}")]
    MissingValue { column: String, row: usize },

    #[error("need at least {needed} values, got {found}")]
    TooFewValues { needed: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("no usable validation windows")]
    NoUsableWindows,

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
