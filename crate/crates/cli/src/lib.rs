//! Batch runner for the translation-asymmetry experiments: strict config
//! parsing, seeded dispatch, and JSON/CSV report emission.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod schema;

pub use config::{parse_config, parse_config_str, ExperimentKind, ExperimentParams, RunConfig, SCHEMA_VERSION};
pub use error::{CliError, CliResult};
pub use report::{emit_csv, render_csv, write_outputs, ExperimentReport};
pub use runner::run;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;
