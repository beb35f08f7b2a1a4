use std::fmt;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration; `path` names the offending field.
    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("solver failure: {0}")]
    Solver(bassopt_core::Error),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(path: impl fmt::Display, reason: impl fmt::Display) -> Self {
        CliError::Config {
            path: path.to_string(),
            reason: reason.to_string(),
        }
    }

    pub fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl From<bassopt_core::Error> for CliError {
    fn from(e: bassopt_core::Error) -> Self {
        match &e {
            _ if e.is_solver_failure() => CliError::Solver(e),
            bassopt_core::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
            _ => CliError::config("model", e),
        }
    }
}
