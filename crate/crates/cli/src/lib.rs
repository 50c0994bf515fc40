//! Command-line front end for `ltve-core`: configuration, field writers,
//! heatmaps and the scaling benchmark.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod heatmap;

pub use commands::{main_with_args, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
