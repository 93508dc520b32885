//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while ingesting data, training, or
/// loading a saved model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input: {context}")]
    EmptyInput { context: String },

    #[error("csv parse error in {origin}: {detail}")]
    Csv { origin: String, detail: String },

    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate column name after trimming: {column}")]
    DuplicateColumn { column: String },

    #[error("missing column: {column}")]
    MissingColumn { column: String },

    #[error("header mismatch: {detail}")]
    HeaderMismatch { detail: String },

    #[error("unknown class label: {class}")]
    UnknownClass { class: String },

    #[error("schema mismatch in column {column}: {detail}")]
    SchemaMismatch { column: String, detail: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("training diverged in {stage} at epoch {epoch}: {detail}")]
    Training {
        stage: String,
        epoch: usize,
        detail: String,
    },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },

    #[error("invalid data: {detail}")]
    InvalidData { detail: String },

    #[error("model bundle corrupt: {detail}")]
    Bundle { detail: String },

    #[error("unsupported model format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u16, supported: u16 },
}

impl Error {
    /// Attach the pipeline stage to a training error bubbling up from a
    /// lower layer.
    pub(crate) fn with_stage(self, stage: &str) -> Error {
        match self {
            Error::Training { epoch, detail, .. } => Error::Training {
                stage: stage.to_string(),
                epoch,
                detail,
            },
            other => other,
        }
    }
}
