//! Config-driven experiment runner for `wave-lab-core`.

pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, ExperimentKind};
pub use report::{Report, Verdict};
pub use run::{execute, run, Outcome, RunError};
