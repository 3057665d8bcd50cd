use thiserror::Error;

use crate::definetti::Certificate;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} exceeds the supported limit {limit}")]
    Range {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("conditional law undefined: conditioning type {counts:?} has zero probability")]
    UndefinedConditional { counts: Vec<u32> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    /// A certified inequality failed beyond tolerance. Carries every
    /// intermediate value of the run.
    #[error("certification failed: {violation}")]
    CertificationFailure {
        violation: String,
        certificate: Box<Certificate<f64>>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
