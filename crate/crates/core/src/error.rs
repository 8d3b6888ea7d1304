use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate sample for series `{series_id}` at timestamp {timestamp} (line {line})")]
    DuplicateSample {
        series_id: String,
        timestamp: f64,
        line: usize,
    },

    #[error("dataset contains no series")]
    EmptyDataset,

    #[error("invalid state: {0}")]
    State(&'static str),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value {0}")]
    InvalidValue(f64),

    #[error("size error: {0}")]
    Size(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error(transparent)]
    Regex(#[from] regex::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
