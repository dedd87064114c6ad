use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested size is beyond what a dense computation path supports.
    #[error("unsupported size {size}: {what} is limited to {limit}")]
    UnsupportedSize {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True when the error stems from bad input rather than a runtime failure.
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::InvalidArgument(_) | Error::UnsupportedSize { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
