//! Command-line front end for `lwshrink`.
//!
//! Exit codes: `0` success, `2` input or configuration error, `3` domain
//! precondition violation (too few samples, `ν ≤ 4`, ...).

pub mod commands;
pub mod config;

use std::fmt;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// A failure together with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<lwshrink::Error> for CliError {
    fn from(e: lwshrink::Error) -> Self {
        if e.is_domain() {
            CliError::domain(e.to_string())
        } else {
            CliError::input(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
