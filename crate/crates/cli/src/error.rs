use std::fmt;

use force_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or missing inputs.
    Usage(String),
    /// Argument parsing failure, already formatted by clap.
    Clap(clap::Error),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Clap(e) if !e.use_stderr() => 0,
            Self::Core(Error::Numerical { .. }) => 3,
            _ => 2,
        }
    }

    /// Prints the error the way the binary does.
    pub fn report(&self) {
        match self {
            Self::Clap(e) => {
                let _ = e.print();
            }
            other => eprintln!("error: {other}"),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => f.write_str(m),
            Self::Clap(e) => write!(f, "{e}"),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Core(Error::Io(e))
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type CliResult<T> = std::result::Result<T, CliError>;
