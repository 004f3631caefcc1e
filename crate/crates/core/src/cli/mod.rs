//! Command-line front end: configuration, file IO and the subcommands.

pub mod commands;
pub mod config;
pub mod io;

use std::fmt;

pub use commands::{
    aggregate_to_table, assess_with_ensembles, cmd_assess, cmd_diagnostics, cmd_paths, cmd_simulate, cmd_sweep,
    read_aggregate_table, run, AssessRow, DiagnosticsRow,
};
pub use config::{parse_sigmas, Command, ConfigOverlay, RunConfig};
pub use io::{format_g6, load_dataset, parse_model_list, read_tsv, write_atomic, write_tsv, NamedModel, Table};

use crate::error::PaviError;

/// A library error plus where in the command it happened.
#[derive(Debug)]
pub struct CliError {
    pub error: PaviError,
    pub context: String,
}

impl CliError {
    pub fn code(&self) -> &'static str {
        self.error.code()
    }
}

/// Rendered as `code: message: context`.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.error.code(), self.error, self.context)
    }
}

impl std::error::Error for CliError {}

impl From<PaviError> for CliError {
    fn from(error: PaviError) -> Self {
        CliError {
            error,
            context: String::new(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub trait Context<T> {
    fn context<C: Into<String>>(self, ctx: C) -> CliResult<T>;
    fn with_context<F: FnOnce() -> String>(self, f: F) -> CliResult<T>;
}

impl<T> Context<T> for crate::error::Result<T> {
    fn context<C: Into<String>>(self, ctx: C) -> CliResult<T> {
        self.map_err(|error| CliError {
            error,
            context: ctx.into(),
        })
    }

    fn with_context<F: FnOnce() -> String>(self, f: F) -> CliResult<T> {
        self.map_err(|error| CliError { error, context: f() })
    }
}
