use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot realize a simple graph: {0}")]
    Unrealizable(String),

    #[error("network is fragmented: giant component holds {giant} of {total} nodes")]
    Disconnected { giant: usize, total: usize },

    #[error("node {0} has no neighbors")]
    IsolatedNode(u32),

    #[error("model is undefined: {0}")]
    Degenerate(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed edge list at line {line}: {message}")]
    EdgeList { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    /// True for errors caused by bad input rather than by the run itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::Config { .. } | Error::EdgeList { .. }
        )
    }
}
