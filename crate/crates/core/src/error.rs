use thiserror::Error;

/// Errors surfaced by the library. `Domain` and `Usage` correspond to
/// precondition violations; the CLI maps them to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("diagnostic undefined: {0}")]
    Diagnostic(String),
    #[error("non-Euclidean input: {0}")]
    NonEuclidean(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("invalid descriptor `{input}`: {reason}")]
    Descriptor { input: String, reason: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by invalid input rather than runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Usage(_) | Error::Descriptor { .. } | Error::Diagnostic(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
