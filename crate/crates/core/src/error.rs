use thiserror::Error;

/// Errors produced by the constellation, channel, estimator and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("target rate {target} bits/use is unattainable (ceiling {ceiling} bits/use)")]
    UnattainableRate { target: f64, ceiling: f64 },

    #[error("search failure: {0}")]
    SearchFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
