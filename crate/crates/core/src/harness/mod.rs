//! Experiment harness: sweep configuration, seeded parallel sweeps and
//! result export.

pub mod config;
pub mod export;
pub mod sweep;

pub use config::{parse_range, BatchRule, Case, SweepConfig, SweepMode};
pub use export::{companion_path, export, import_json, import_records_csv, Format};
pub use sweep::{run_sweep, run_sweep_with_threads, sample_configuration, threshold_curve, Curve, Record, Statistic, Summary, SweepResult};
