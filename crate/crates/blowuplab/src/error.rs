use std::io;
use std::path::Path;
use std::process::ExitCode;

use blowuplab_core::Error as CoreError;

/// Failures of a command, split by the exit status they map to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, flags or input files.
    #[error("input error: {0}")]
    Input(String),
    /// Failure while running: numerical breakdown or an unwritable output.
    #[error("runtime error: {0}")]
    Runtime(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => Status::InputError.into(),
            CliError::Runtime(_) => Status::RuntimeError.into(),
        }
    }

    pub fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub fn write(path: &Path, e: io::Error) -> Self {
        CliError::Runtime(format!("{}: {e}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numerical(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Exit statuses of the command-line tool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    CertificateFailure = 1,
    InputError = 2,
    RuntimeError = 3,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s as u8)
    }
}
