use annuli_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("resource: {0}")]
    Resource(String),
}

impl CliError {
    /// 2 for usage errors, 3 for budget and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::Domain(_) | CoreError::EmptyEnsemble => {
                CliError::Usage(e.to_string())
            }
            CoreError::Budget { .. } | CoreError::Io(_) | CoreError::Csv(_) => CliError::Resource(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
