use std::path::PathBuf;

/// Failures of a command, split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config: {0}")]
    Config(String),
    #[error("input {}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Pipeline(#[from] shapaudit_core::Error),
    #[error("output {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Input { .. } => 2,
            AppError::Pipeline(_) | AppError::Output { .. } => 1,
        }
    }

    pub fn input(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        AppError::Input {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Output {
            path: path.into(),
            source,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
