use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("genome has {actual} bits, encoding expects {expected}")]
    GenomeLength { expected: usize, actual: usize },

    #[error("invalid genome string: {0}")]
    GenomeParse(String),

    #[error("invalid encoding spec: {0}")]
    InvalidEncoding(String),

    #[error("operation requires a {expected} encoding")]
    EncodingKind { expected: &'static str },

    #[error("invalid layout (line {line}): {message}")]
    Layout { line: usize, message: String },

    #[error("invalid environment spec: {0}")]
    InvalidEnvironment(String),

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("action out of range: {0}")]
    InvalidAction(String),

    #[error("trajectory must contain at least one {0}")]
    EmptyTrajectory(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("policy file {path}: {message}")]
    PolicyFormat { path: PathBuf, message: String },

    #[error("policy does not match environment: {0}")]
    PolicyMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no valid initial state after {attempts} attempts; environment too constrained")]
    RejectionExhausted { attempts: usize },

    #[error("malformed run bundle {path}: {message}")]
    Bundle { path: PathBuf, message: String },

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
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Configuration problems map to exit code 1, everything else to 2.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidEncoding(_)
                | Error::Layout { .. }
                | Error::InvalidEnvironment(_)
                | Error::PolicyFormat { .. }
                | Error::PolicyMismatch(_)
                | Error::RejectionExhausted { .. }
        )
    }
}
