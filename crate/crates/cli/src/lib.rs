//! Experiment runner around the `anderson1d` library: configuration
//! parsing, deterministic parallel disorder averaging, and CSV emission.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::{RunError, run_experiment};
pub use output::{ExperimentResult, Field};
