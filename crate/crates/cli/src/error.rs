use std::fmt;
use std::process::ExitCode;

use chemofv::Error;

/// Failure classes that map one-to-one onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1.
    Runtime(String),
    /// Exit 2: bad arguments or configuration.
    Usage(String),
    /// Exit 3: the coupled oracle did not converge.
    Oracle(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Oracle(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Runtime(m) => write!(f, "error: {m}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Oracle(m) => write!(f, "oracle failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::OracleDiverged { .. } => CliError::Oracle(message),
            Error::OracleTooLarge { .. }
            | Error::InvalidConfig(_)
            | Error::InvalidModel(_)
            | Error::InvalidMesh(_)
            | Error::UnknownPreset(_)
            | Error::InvalidTimeStep(_)
            | Error::PointOutside { .. } => CliError::Usage(message),
            _ => CliError::Runtime(message),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
