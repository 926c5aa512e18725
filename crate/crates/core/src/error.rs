use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("no model for mode {0}")]
    MissingModel(String),

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("boundary file: {0}")]
    Boundary(String),
}

impl Error {
    /// Stable machine-readable kind, used in the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv(_) => "csv",
            Error::InvalidInput(_) => "invalid-input",
            Error::DegenerateTrainingSet(_) => "degenerate-training-set",
            Error::EmptySelection(_) => "empty-selection",
            Error::SchemaMismatch { .. } => "schema-mismatch",
            Error::MissingModel(_) => "missing-model",
            Error::Lexicon(_) => "lexicon",
            Error::Boundary(_) => "boundary",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
