//! Command-level errors mapped to stable exit codes:
//! 0 ok, 2 usage (clap), 3 data, 4 training, 5 corrupt checkpoint.

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Training(String),
    #[error("{0}")]
    Checkpoint(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Data(_) => 3,
            AppError::Training(_) => 4,
            AppError::Checkpoint(_) => 5,
        }
    }

    pub fn data(err: impl std::fmt::Display) -> AppError {
        AppError::Data(err.to_string())
    }

    pub fn training(err: impl std::fmt::Display) -> AppError {
        AppError::Training(err.to_string())
    }

    pub fn checkpoint(err: impl std::fmt::Display) -> AppError {
        AppError::Checkpoint(err.to_string())
    }
}
