use std::fmt;

use kaondyn::KaonError;

/// Failure of a CLI run, split by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, config or input data (exit 2).
    Usage(String),
    /// Numerical or I/O failure (exit 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<KaonError> for CliError {
    fn from(e: KaonError) -> Self {
        match e {
            KaonError::Parse { .. }
            | KaonError::InvalidParameter(_)
            | KaonError::InsufficientData { .. }
            | KaonError::NegativeTime(_)
            | KaonError::TimeReversal { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}
