use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("integration failed: {0}")]
    IntegrationFailure(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    #[error("step cap exceeded: {0}")]
    CapExceeded(String),
    #[error("runaway walk: {0}")]
    Runaway(String),
    #[error("out of scope: {0}")]
    OutOfScope(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable machine-readable tag for each variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InvalidInput(_) => "invalid-input",
            Error::UnknownDistribution(_) => "unknown-distribution",
            Error::IntegrationFailure(_) => "integration-failure",
            Error::Divergence(_) => "divergence",
            Error::Domain(_) => "domain",
            Error::DegenerateState(_) => "degenerate-state",
            Error::CapExceeded(_) => "cap-exceeded",
            Error::Runaway(_) => "runaway",
            Error::OutOfScope(_) => "out-of-scope",
        }
    }

    /// The message without the variant prefix.
    pub fn message(&self) -> &str {
        match self {
            Error::InvalidParameter(m)
            | Error::InvalidInput(m)
            | Error::UnknownDistribution(m)
            | Error::IntegrationFailure(m)
            | Error::Divergence(m)
            | Error::Domain(m)
            | Error::DegenerateState(m)
            | Error::CapExceeded(m)
            | Error::Runaway(m)
            | Error::OutOfScope(m) => m,
        }
    }
}
