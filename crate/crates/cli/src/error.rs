use thiserror::Error;

use stam_core::StamError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error(transparent)]
    Solver(#[from] StamError),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numeric divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigParse { .. } | CliError::Config(_) | CliError::UnknownSuite(_) => 2,
            CliError::Solver(StamError::Divergence { .. })
            | CliError::Solver(StamError::NonFiniteComponent { .. }) => 3,
            CliError::Solver(StamError::Config(_)) => 2,
            _ => 1,
        }
    }
}
