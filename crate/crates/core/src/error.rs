use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the simulator, the agent and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value is invalid or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// The scenario cannot be simulated as configured.
    #[error("scenario error: {0}")]
    Scenario(String),

    /// A caller broke an operation's contract (shape mismatch, bad action).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no visible satellite")]
    NoVisibleSatellite,

    #[error("unknown baseline `{name}` (valid: {valid})")]
    UnknownBaseline { name: String, valid: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
