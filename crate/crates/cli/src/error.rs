use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, a bad configuration or a model error.
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Infeasible(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<hapvec::Error> for CliError {
    fn from(e: hapvec::Error) -> Self {
        match e {
            hapvec::Error::InfeasibleScenario(_) => CliError::Infeasible(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
