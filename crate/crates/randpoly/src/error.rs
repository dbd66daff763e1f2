use thiserror::Error;

pub type AppResult<T> = Result<T, AppError>;

/// Failures of the command line front end, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerical(#[from] randpoly_core::Error),
}

impl AppError {
    /// 2 for bad invocations or inputs, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Numerical(_) => 3,
            _ => 2,
        }
    }
}
