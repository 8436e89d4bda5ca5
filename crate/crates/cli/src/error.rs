use std::fmt;
use std::process::ExitCode;

/// Exit statuses: 0 on success, one fixed code per failure class.
pub mod exit {
    pub const CONFIG: u8 = 2;
    pub const IO: u8 = 3;
    pub const DIVERGENCE: u8 = 4;
    pub const OTHER: u8 = 5;
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config files, inadmissible solver settings.
    Config(String),
    /// Unreadable or malformed input files, unwritable outputs.
    Io(String),
    Divergence(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io(_) => exit::IO,
            CliError::Divergence(_) => exit::DIVERGENCE,
            CliError::Other(_) => exit::OTHER,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Divergence(m) => write!(f, "divergence: {m}"),
            CliError::Other(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rhc_msvm::Error> for CliError {
    fn from(e: rhc_msvm::Error) -> Self {
        use rhc_msvm::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(_) => CliError::Config(msg),
            E::Io { .. } | E::Data { .. } | E::Document(_) | E::Input(_) => CliError::Io(msg),
            E::Divergence { .. } => CliError::Divergence(msg),
            _ => CliError::Other(msg),
        }
    }
}
