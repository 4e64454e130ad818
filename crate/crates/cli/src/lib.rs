//! Command line front end: system definition files, the commands wiring the
//! checks and constructions of `contactkit`, and their JSON reports.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use cli::{run, Cli, Command};
pub use config::{load_config, parse_config, LoadedConfig, SystemConfig};
pub use error::{CliError, CliResult};
pub use report::{Check, Outcome, Report};
