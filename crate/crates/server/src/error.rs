use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] saxnav_core::Error),
    #[error("upload has {count} series, more than the limit of {max}")]
    TooLarge { count: usize, max: usize },
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("no node `{0}` in this session")]
    UnknownNode(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("session cache: {0}")]
    Cache(#[from] std::io::Error),
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;
