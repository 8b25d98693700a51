use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("transport error (last status {status:?}): {message}")]
    Transport { status: Option<u16>, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("state error: {0}")]
    State(String),

    #[error("invalid gap {gap}: valid interior gaps are 1..={max}")]
    InvalidGap { gap: usize, max: usize },

    #[error("incomplete data: {0}")]
    IncompleteData(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
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

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::InvalidDomain(msg.into())
    }
}
