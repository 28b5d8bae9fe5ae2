//! Batch front-end behind the `pin` binary.

pub mod config;
pub mod run;

pub use config::{
    parse_config, parse_config_with_seed, ConfigError, ConfigErrors, Experiment, RunConfig,
};
pub use run::{run, RunOutcome, EXIT_BUDGET, EXIT_CONFIG, EXIT_DIAGNOSTIC, EXIT_IO, EXIT_OK};
