//! Experiment layer for the `hbfsm-core` link kernels: TOML configs, parallel
//! Monte Carlo drivers, CSV/JSON/SVG outputs and the `hbfsm` command line.

pub mod app;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod sim;

pub use config::{ExperimentConfig, Overrides, ResolvedExperiment};
pub use error::AppError;
