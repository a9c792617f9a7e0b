use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error_estimate:e} after {panels} panels")]
    NonConvergence {
        estimate: f64,
        error_estimate: f64,
        panels: usize,
    },

    #[error("non-finite value encountered at {location}")]
    NonFinite { location: String },

    #[error("kernel is not normalized: measured (1 ∧ |h|^p)-mass {mass}")]
    Unnormalized { mass: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed record: {0}")]
    Record(String),

    #[error("sampling table construction failed: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
