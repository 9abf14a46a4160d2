use std::fmt;

use testbf_core::Error as CoreError;

/// Process exit codes by error class.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("configuration: {0}")]
    Config(String),
    /// Unreadable input or unwritable output.
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(String),
}

pub type AppResult<T> = std::result::Result<T, AppError>;

impl AppError {
    pub fn config(msg: impl fmt::Display) -> Self {
        AppError::Config(msg.to_string())
    }

    pub fn io(context: impl fmt::Display, source: std::io::Error) -> Self {
        AppError::Io { context: context.to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => EXIT_CONFIG,
            AppError::Io { .. } | AppError::Csv(_) => EXIT_DATA,
            AppError::Core(e) => match e {
                CoreError::Domain(_) | CoreError::Unsupported(_) | CoreError::BudgetExceeded { .. } => EXIT_CONFIG,
                CoreError::InvalidData(_)
                | CoreError::DegenerateIntercept
                | CoreError::NoEvents
                | CoreError::SingularDesign { .. }
                | CoreError::ZeroVariance { .. }
                | CoreError::Schema(_)
                | CoreError::UndefinedAuc
                | CoreError::Empty(_) => EXIT_DATA,
                CoreError::NonConvergence { .. }
                | CoreError::DegenerateFit
                | CoreError::Numeric(_)
                | CoreError::Integration { .. }
                | CoreError::NotPositiveDefinite
                | CoreError::InfiniteQuantile
                | CoreError::TooManyFailures { .. } => EXIT_NUMERIC,
            },
        }
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Csv(e.to_string())
    }
}
