use std::io;

use thiserror::Error;

/// Errors produced by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("estimator diverges: {0}")]
    Divergence(String),

    #[error("no valid rho: {0}")]
    NoValidRho(String),

    #[error("Chernoff validity violated: {0}")]
    Validity(String),

    #[error("instance too large for exact enumeration: {0}")]
    SizeLimit(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numeric validity conditions of the bounds
    /// (as opposed to bad input).
    pub fn is_numeric_validity(&self) -> bool {
        matches!(self, Error::NoValidRho(_) | Error::Validity(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}
