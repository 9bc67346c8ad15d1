//! Batch front-end for the chassis RIS toolkit: configuration loading, the
//! `simulate`, `characterize`, `optimize` and `report` workflows, and their
//! CSV, JSON and SVG artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::RunOptions;
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
