use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A hyperparameter or switch is out of its valid range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input fell outside a kernel's domain (shape mismatch, zero norm, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("class {0} has no prototype (empty queue or no labeled samples)")]
    UnseededClass(usize),

    /// Numerical failure during optimization.
    #[error("training error: {0}")]
    Training(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether this error stems from user-supplied configuration rather than
    /// data or runtime failures. The CLI maps this onto its exit code.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::UnseededClass(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
