use thiserror::Error;

/// Errors surfaced by the command-line front end, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("compute: {0}")]
    Compute(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<ltve_core::Error> for CliError {
    fn from(e: ltve_core::Error) -> Self {
        use ltve_core::Error as E;
        match e {
            E::InvalidParameter { ref name, .. } => CliError::Usage(format!("--{name}: {e}")),
            E::Usage(_) | E::CacheMismatch(_) => CliError::Usage(e.to_string()),
            E::Io(_) | E::Parse(_) => CliError::Io(e.to_string()),
            E::Integration { .. } | E::Validation(_) | E::Pool(_) => CliError::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
