//! Experiment driver: configuration, the optimization loop, traces and
//! cross-seed summaries.

pub mod config;
pub mod run;
pub mod summary;
pub mod trace;

pub use config::{ExperimentConfig, Method, Metric, ObjectiveSpec};
pub use run::{recommend, run_bo, run_experiment};
pub use summary::{summarize, SummaryRow};
pub use trace::{Trace, TraceRow};
