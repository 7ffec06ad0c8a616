//! Configuration parsing, command dispatch and reproducible artifact
//! writing for the `holosup` binary.

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_config, Command, ExperimentConfig};
pub use error::CliError;
pub use run::{execute, Manifest};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "HOLOSUP_OUTPUT_DIR";
