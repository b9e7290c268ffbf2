/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The model or one of its runs is invalid (exit code 1).
    #[error("{0}")]
    Model(String),
    /// Bad arguments (exit code 2).
    #[error("{0}")]
    Usage(String),
    /// Files could not be read or written (exit code 2).
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}
