use std::path::PathBuf;

/// Errors raised by ingestion, estimation, detection and simulation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shapes or counts that do not line up (lengths, divisibility, ordering).
    #[error("structural error: {0}")]
    Structural(String),

    /// Value outside the domain of a formula (non-positive price, delta >= 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    /// Input on which an estimator has nothing to work with, e.g. zero realized variance.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by a bad configuration rather than bad data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
