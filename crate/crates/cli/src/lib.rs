//! Command-line front end for `fullerene-stm`.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, CliError};
pub use config::{ConfigError, RunConfig};
