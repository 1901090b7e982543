//! Sweep runner behind the `bandenc` command: configuration, execution and
//! report emission.

pub mod config;
pub mod report;
pub mod sweep;

pub use config::{parse_precon, Multiplication, OutputPaths, SweepConfig, Tolerances, SCHEMA_VERSION};
pub use report::{emit_report, read_json_report, write_csv, write_json, COLUMNS};
pub use sweep::{run_sweep, SweepReport, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bandenc::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
