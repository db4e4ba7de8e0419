//! Library side of the `kinetics` binary, split out so tests can drive runs
//! without spawning a process.

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_config, RunConfig, Subcommand};
pub use error::CliError;
pub use run::{execute, run, write_outputs, Output};
