use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid step function: {0}")]
    InvalidStep(String),
    #[error("invalid shape function: {0}")]
    InvalidShape(String),
    #[error("invalid space specification: {0}")]
    InvalidSpace(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidStep(_) => "invalid_step",
            Error::InvalidShape(_) => "invalid_shape",
            Error::InvalidSpace(_) => "invalid_space",
            Error::DomainMismatch(_) => "domain_mismatch",
            Error::OutOfRange(_) => "out_of_range",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
            Error::Unsupported(_) => "unsupported",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
