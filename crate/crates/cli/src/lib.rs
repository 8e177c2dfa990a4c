//! Configuration-driven sweeps over the synchronous-pump model, written as
//! plot-ready CSV.
//!
//! Every output starts with one `#` line holding the resolved configuration
//! as sorted `section.key=value` pairs, followed by a column header and rows
//! in a fixed order. Numbers carry nine significant digits.

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use commands::{run, Command, Output};
pub use config::RunConfig;
pub use error::CliError;
