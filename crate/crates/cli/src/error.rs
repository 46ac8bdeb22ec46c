use thiserror::Error;

/// CLI failure, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input, configuration or domain error. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// A numerical procedure (fit, calibration, solver) failed. Exit code 3.
    #[error("{0}")]
    Numerical(String),
    /// The reader went away (e.g. `rbc ... | head`). Not an error for the user.
    #[error("output closed")]
    OutputClosed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::OutputClosed => 0,
        }
    }
}

impl From<rbc_core::Error> for CliError {
    fn from(e: rbc_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError::OutputClosed;
        }
        CliError::Input(format!("I/O error: {e}"))
    }
}
