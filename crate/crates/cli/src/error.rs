use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 2.
    #[error("{0}")]
    Validation(String),
    /// Failure while running; exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<zoqn::Error> for CliError {
    fn from(e: zoqn::Error) -> Self {
        match e {
            zoqn::Error::InvalidArgument(_) | zoqn::Error::UnknownProblem(_) | zoqn::Error::DimensionMismatch { .. } => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
