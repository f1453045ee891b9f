use std::fmt;

/// CLI-level errors carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config, parameters, or unwritable outputs (exit 1).
    Validation(String),
    /// Numerical failure: norm drift, undefined squeezing metric (exit 2).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<riqs_core::Error> for CliError {
    fn from(err: riqs_core::Error) -> Self {
        match err {
            riqs_core::Error::NormDrift { .. } | riqs_core::Error::UndefinedSqueezing { .. } => {
                CliError::Numerical(err.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Validation(format!("i/o: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
