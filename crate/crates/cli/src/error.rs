use thiserror::Error;

/// Errors surfaced by the command line, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config files or scenario files (exit 2).
    #[error("{0}")]
    Config(String),
    /// Unsupported pairings and numeric-domain failures (exit 3).
    #[error("{0}")]
    Unsupported(String),
    /// Some verification check failed (exit 1).
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }

    /// Prefixes the message with the flag or file it concerns.
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Unsupported(m) => CliError::Unsupported(format!("{what}: {m}")),
            CliError::Failed(m) => CliError::Failed(format!("{what}: {m}")),
        }
    }
}

impl From<privamp::Error> for CliError {
    fn from(e: privamp::Error) -> Self {
        use privamp::Error::*;
        match e {
            UnsupportedPairing { .. }
            | UnsupportedFamily(_)
            | DivergentIntegrand(_)
            | InfiniteLoss
            | InstanceTooLarge { .. }
            | Unreachable(_) => CliError::Unsupported(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub fn config_error(what: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{what}: {msg}"))
}
