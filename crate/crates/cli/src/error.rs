use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid input, or an output that cannot be
    /// written.
    #[error("{0}")]
    Config(String),
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
    #[error("degenerate sweep: {0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::CrossCheck(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o error: {e}"))
    }
}
