use std::fmt;

use sk_landscape::Error;

/// Failures of a run, each with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Check(String),
    Resource(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Io(_) | CliError::Numerical(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Resource(m) => write!(f, "resource limit: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource(_) => CliError::Resource(e.to_string()),
            Error::Numerical(_) => CliError::Numerical(e.to_string()),
            Error::Domain { .. } | Error::DimensionMismatch { .. } | Error::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}
