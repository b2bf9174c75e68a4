//! Scenario files, presets, output formats and subcommands of the `tracbf`
//! command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use error::{CliError, Result};
