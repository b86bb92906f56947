//! Batch driver for the `statwintgen` binary.
//!
//! Exit codes: 0 when every check passed, 1 when a property or inequality
//! violation was found, 2 for usage, configuration and input errors.

mod config;
mod run;

pub use config::{Cli, Command, CommandArgs, Example, Format, RunConfig, Settings, WintgenArgs, OUT_DIR_ENV};
pub use run::{execute, run, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Geometry(#[from] statwintgen::GeometryError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        2
    }
}
