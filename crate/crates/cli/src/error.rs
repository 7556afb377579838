use std::fmt;

use guided_decode::Error;

/// Command failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration: exit 2.
    Usage(String),
    Clap(clap::Error),
    /// Library error: model failures exit 4, everything else 3.
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Clap(e) => {
                if e.use_stderr() {
                    2
                } else {
                    0
                }
            }
            CliError::Core(e) if e.is_model_error() => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Core(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<clap::Error> for CliError {
    fn from(e: clap::Error) -> Self {
        CliError::Clap(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}
