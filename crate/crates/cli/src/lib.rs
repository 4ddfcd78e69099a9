//! Batch front end: experiment configs in, CSV tables out.

pub mod config;
pub mod run;
pub mod table;

pub use config::{load_config, parse_config, parse_config_in, ConfigError, ConfigErrorKind, ExperimentConfig, Mode};
pub use run::{evaluate, run, Point, RunError, RunOptions, RunReport, SUMMARY_COLUMNS};
pub use table::{parse_table, read_table, Table};
