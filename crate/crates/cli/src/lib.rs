//! Plumbing of the `danm` command-line tool: file formats, scenarios,
//! experiment configuration and sweeps.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod scenario;

pub use config::BenchConfig;
pub use error::{CliError, CliResult};
pub use experiments::{run_bench, run_experiment, write_csv, Row, CSV_COLUMNS};
pub use scenario::{generate, Scenario, ScenarioSpec, SourceLayout};
