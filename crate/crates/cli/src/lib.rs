//! Experiment runner behind the `qfree` binary.

pub mod commands;
pub mod config;
pub mod plot;

use std::fmt;

use qfree_core::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVARIANT_FAILURE: i32 = 1;
    pub const INPUT_ERROR: i32 = 2;
    /// Interrupted by Ctrl-C; partial output was written.
    pub const INTERRUPTED: i32 = 130;
}

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, unreadable or malformed input, unsupported request.
    Input(String),
    /// A computed identity or convergence check failed.
    Invariant(String),
    Interrupted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => exit::INPUT_ERROR,
            Self::Invariant(_) => exit::INVARIANT_FAILURE,
            Self::Interrupted(_) => exit::INTERRUPTED,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Input(m) | Self::Invariant(m) | Self::Interrupted(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::IdentityCheckFailed { .. }
            | Error::MismatchWithDagger { .. }
            | Error::QuadratureNotConverged { .. }
            | Error::NotPsd { .. } => Self::Invariant(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}
