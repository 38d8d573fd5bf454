use std::fmt;

use lits::LitsError;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LitsError> for CliError {
    fn from(e: LitsError) -> Self {
        let msg = e.to_string();
        match e {
            LitsError::InvalidParameter { .. } | LitsError::MissingAttribute(_) => CliError::Usage(msg),
            LitsError::Parse(_) | LitsError::Io(_) | LitsError::EmptyNeighborhood => CliError::Input(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
