//! Experiment harness: resource counts, sweep configuration and execution,
//! CSV output and the self-test suite.

pub mod config;
pub mod report;
pub mod resources;
pub mod selftest;
pub mod sweep;

pub use config::{NoiseGrid, ScenarioKind, SweepConfig, TargetPattern, Trials};
pub use report::{csv_string, read_csv_from, summarize, summary_rows, write_csv, write_csv_to, SummaryRow, CSV_HEADER};
pub use resources::{channel_uses, format_resource_table, resource_table, Regime, ResourceMethod, ResourceQuery, ResourceRow};
pub use selftest::{run_selftest, CheckOutcome};
pub use sweep::{run_sweep, run_sweep_with_jobs, Status, SweepRecord};
