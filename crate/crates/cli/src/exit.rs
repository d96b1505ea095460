//! Process exit codes.

use std::fmt;
use std::process::ExitCode;

use wgsqueeze::Error;

/// Bad command line or configuration.
pub const USAGE: u8 = 2;
/// Malformed input data file.
pub const PARSE: u8 = 3;
/// A model or solver rejected its inputs or failed numerically.
pub const NUMERIC: u8 = 4;
/// File could not be read or written.
pub const IO: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: USAGE,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: IO,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Parse { .. } => PARSE,
            Error::Io { .. } => IO,
            _ => NUMERIC,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Config-level validation: a model precondition failure while building the
/// run from `key` is a configuration error naming that key.
pub trait ConfigContext<T> {
    fn key(self, key: &str) -> Result<T, CliError>;
}

impl<T> ConfigContext<T> for Result<T, Error> {
    fn key(self, key: &str) -> Result<T, CliError> {
        self.map_err(|e| match e.root() {
            Error::Parse { .. } | Error::Io { .. } => CliError::from(e),
            _ => CliError::config(format!("{key}: {e}")),
        })
    }
}
