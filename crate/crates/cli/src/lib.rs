//! Batch runner for `gabor-stab` experiments described by JSON files.

pub mod config;
mod run;

pub use run::{load_config, run_config, write_atomic, CliError, RunContext};
