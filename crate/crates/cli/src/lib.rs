//! Command-line front end for the relay-cell simulator: scenario files,
//! batch runs, sweeps and the two-user reference example.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod seeds;

pub use commands::{cmd_oracle, cmd_run, cmd_sweep, OutputBundle, RunOptions};
pub use config::{parse_scenario, PolicySelection, Scenario};
pub use error::{CliError, Result};
