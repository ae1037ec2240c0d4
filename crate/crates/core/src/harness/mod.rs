//! Experiment orchestration: configuration, batched runs, aggregation,
//! reports and theory probes.

pub mod aggregate;
pub mod config;
pub mod growth;
pub mod output;
pub mod run;
pub mod theory;

pub use aggregate::{aggregate, summarize, AggregateCurve, CurvePoint};
pub use config::{log_grid, ExperimentConfig, Overrides};
pub use growth::{growth_ratio, instance_growth_report, GrowthReport, GrowthRow};
pub use output::{emit_csv, fmt_f64, read_rounds_csv, RoundRow, TraceRow};
pub use run::{run_experiment, run_seed, ExperimentResult, RunOutcome};
pub use theory::{verify_theorems, InvariantMonitor, ProbeOutcome, TheoryProbe};
