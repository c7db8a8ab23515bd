use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dfl_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Machine-readable failure, written as JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use dfl_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Core(E::Parameter(_) | E::Parse { .. }) => "config",
            CliError::Core(E::Capacity { .. }) => "capacity",
            CliError::Core(E::Convergence(_)) => "convergence",
            CliError::Core(E::Statistics(_)) => "statistics",
            CliError::Verification(_) => "verification",
            CliError::Io(_) => "io",
        }
    }

    /// 2 config, 3 capacity, 4 convergence or statistics, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "capacity" => 3,
            "convergence" | "statistics" => 4,
            _ => 1,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}
