//! Experiment runner for the catalysis toolkit.
//!
//! The binary `catalysis` wraps the functions in [`commands`]; everything it
//! prints is reproducible from its inputs, config and seed.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sampling;

pub use error::{exit, CliError, CliResult};
