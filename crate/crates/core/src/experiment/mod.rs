//! The multi-trial benchmark harness: configuration, execution, statistics
//! and CSV reports.

pub mod config;
pub mod metrics;
pub mod report;
pub mod runner;

pub use config::{DataPaths, ExperimentConfig, ModelKind};
pub use metrics::{compute_tail_std, CurvePoint, RunMetrics, TrialMetrics};
pub use report::{emit_report, emit_sweep, summary_csv};
pub use runner::{
    compare, prepare_data, run_experiment, run_on, run_trial, run_trials, sweep_gamma, PreparedData,
    SweepTable,
};
