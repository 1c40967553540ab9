//! Command-line front-end for `wchernoff`.
//!
//! Each command reads JSON model and weight descriptions, runs one library
//! operation and writes a [`Report`] (or a CSV table for `curve` and
//! `simulate --format csv`).

pub mod args;
mod commands;
pub mod config;
pub mod report;
mod validate;

pub use args::{Cli, Command, CommandKind, Format, Options};
pub use config::CommandConfig;
pub use report::{Output, Report};
pub use validate::validate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{flag}: malformed JSON at `{path}`: {message}")]
    Json {
        flag: String,
        path: String,
        message: String,
    },
    #[error("{0}")]
    Io(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Library(#[from] wchernoff::Error),
}

impl CliError {
    /// 3 for numerical non-convergence, 2 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// Validate `config` and run it.
pub fn run(config: &CommandConfig) -> Result<Output, CliError> {
    let diagnostics = validate(config);
    if !diagnostics.is_empty() {
        return Err(CliError::Invalid(diagnostics));
    }
    commands::dispatch(config)
}
