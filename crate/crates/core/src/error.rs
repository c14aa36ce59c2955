use thiserror::Error;

use crate::methods::MethodId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("{method} is not applicable for n = {n}")]
    NotApplicable { method: MethodId, n: usize },

    #[error("{0} requires raw data")]
    RequiresRawData(MethodId),

    #[error("{method} failed: {reason}")]
    MethodFailure { method: MethodId, reason: String },

    #[error("numeric failure: {msg}")]
    Numeric { msg: String, partial: Option<f64> },

    #[error("singular transform: |r| = 1")]
    SingularTransform,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            msg: msg.into(),
            partial: None,
        }
    }

    pub(crate) fn failure(method: MethodId, reason: impl Into<String>) -> Self {
        Error::MethodFailure {
            method,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
