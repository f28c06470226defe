//! Command-line pipeline for DeepLRR: synthesis, training, clustering,
//! evaluation, grid search and heatmap output.

pub mod args;
pub mod commands;
pub mod error;
pub mod heatmap;
pub mod report;

pub use error::{CliError, CliResult};
