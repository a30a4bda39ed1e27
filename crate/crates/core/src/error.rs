use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Ingest {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unrecognized layout in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("no messages parsed from {0}")]
    EmptyCorpus(PathBuf),

    #[error("{path}:{line}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid label {0}, expected 0 or 1")]
    InvalidLabel(u8),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("stratification impossible: {0}")]
    Stratification(String),

    #[error("invalid few-shot request: {0}")]
    FewShot(String),

    #[error("vocabulary mismatch: model expects {expected}, got {found}")]
    VocabularyMismatch { expected: String, found: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("result conflict: cell {0} already recorded")]
    Conflict(String),

    #[error("unsupported model file version {0}")]
    ModelVersion(u32),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than an execution failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Serde(_))
    }
}
