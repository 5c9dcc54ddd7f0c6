//! Configuration files, CSV grids, parallel sweeps and the `tdgrating`
//! command line on top of `tdgrating-core`.

pub mod cli;
pub mod config;
pub mod csv;
pub mod runner;

pub use cli::cli_main;
pub use config::{parse_config, ConfigError, RunConfig};
pub use csv::{emit_csv, parse_csv, read_csv, write_csv, CsvError};
pub use runner::{run_sweep, worker_count};
