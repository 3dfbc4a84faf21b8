use thiserror::Error;

/// Errors produced anywhere in the reservoir pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrcError {
    /// Invalid parameters: qubit counts, indices, seeds, modes, splits.
    #[error("configuration error: {0}")]
    Config(String),
    /// Non-finite or malformed numerical input.
    #[error("data error: {0}")]
    Data(String),
    /// The readout system could not be solved.
    #[error("fit error: {0}")]
    Fit(String),
    /// A metric is undefined for the given data (e.g. zero target variance).
    #[error("undefined metric: {0}")]
    Metric(String),
}

pub type Result<T> = std::result::Result<T, QrcError>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(QrcError::Config(msg.into()))
}
