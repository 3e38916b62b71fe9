use thiserror::Error;

/// Errors raised by trace handling, configuration and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("trace has no requests, so it has no request size")]
    EmptyTrace,

    #[error("stream of {0} request(s) has no random percentage (need at least 2)")]
    UndefinedStats(usize),

    #[error("offsets must be sorted: {first} > {second}")]
    Unsorted { first: u64, second: u64 },

    #[error("percentage {0} is outside [0, 1]")]
    InvalidPercentage(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
