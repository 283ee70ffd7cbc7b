use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration needs {required} vectors, budget is {budget}")]
    Budget { required: u64, budget: u64 },
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
