use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
    #[error("contract violation at station {station}, round {round}: {detail}")]
    ContractViolation {
        station: u32,
        round: u64,
        detail: String,
    },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::ModelViolation(msg.into())
    }
}
