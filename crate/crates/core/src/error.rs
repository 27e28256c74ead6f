use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the OSD pipeline.
#[derive(Debug, Error)]
pub enum OsdError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: label {value:?} is not 0 or 1")]
    BadLabel { row: usize, value: String },
    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),
    #[error("row {row}, column {column}: non-finite value")]
    NonFinite { row: usize, column: usize },
    #[error("dataset needs at least {min} objects, got {got}")]
    TooFewObjects { min: usize, got: usize },
    #[error("inconsistent dimensions: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{name} = {value} is out of range ({expected})")]
    ParamOutOfRange {
        name: &'static str,
        value: String,
        expected: String,
    },
    #[error("object index {index} out of range for {count} objects")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("k mismatch: graph was built with k = {graph}, query asked for k = {requested}")]
    KMismatch { graph: usize, requested: usize },
    #[error("weight histogram needs at least one edge")]
    EmptyEdgeSet,
    #[error("labels have length {labels}, dataset has {objects} objects")]
    LabelLength { labels: usize, objects: usize },
    #[error(
        "labels must contain both outliers and normals (outliers: {outliers}, normals: {normals})"
    )]
    SingleClass { outliers: usize, normals: usize },
    #[error("generator gave up after {tries} rejected draws")]
    RejectionFailure { tries: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl OsdError {
    /// Whether this error stems from user configuration (exit code 2) rather
    /// than from the data itself (exit code 3).
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            OsdError::ParamOutOfRange { .. }
                | OsdError::KMismatch { .. }
                | OsdError::Config(_)
                | OsdError::MissingLabelColumn(_)
        )
    }
}

pub type Result<T, E = OsdError> = std::result::Result<T, E>;
