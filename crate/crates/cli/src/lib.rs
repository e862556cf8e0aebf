//! Batch front-end for the `hyperstab` library: TOML experiment configs,
//! command dispatch and deterministic JSON/CSV outputs.

pub mod config;
pub mod error;
pub mod overrides;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use run::{run, run_from_path, Command};
