//! Experiment driver: loads a TOML configuration, runs every requested scheme
//! over a grid of average power budgets (and semantic encoders K) on one
//! shared set of fading states, and writes CSV tables and SVG charts.

pub mod config;
pub mod output;
pub mod plot;
pub mod sweep;

pub use config::{load_config, parse_schemes, ConfigError, ExperimentConfig};
pub use output::{read_sweep_csv, write_outputs, write_sweep_csv, OutputError};
pub use plot::emit_plot;
pub use sweep::{run_sweep, Cell, SweepError, SweepResult, SweepRow};
