//! Library side of the experiment runner: configuration, scenarios and
//! report files, shared between the `detform` binary and integration
//! tests.

// Interval preconditions use `!(a < b)` so NaN endpoints fall into the
// error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{ExperimentConfig, Scenario};
pub use report::{Report, ReportMeta, SweepRow};
pub use scenarios::{exit_code_for, run, scenario_matches, RunFailure};
