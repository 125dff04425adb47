//! Experiment harness for the `twotier` outage models: configs, sweeps,
//! figure presets, CSV output and validation suites.

pub mod config;
pub mod experiment;
pub mod figures;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig, Sweep, SweepVar, TagSpec, Target};
pub use experiment::{run, write_csv, Compute, ResultRow, CSV_HEADER};
