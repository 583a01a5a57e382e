use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the KFLANN library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}, column {column}: value is not finite")]
    NonFinite { row: usize, column: usize },
    #[error("row {row} has {found} columns, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("dataset is empty")]
    Empty,
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("dataset {0:?} has no class labels")]
    Unlabeled(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
