use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("unknown identity: {0}")]
    UnknownIdentity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
