//! Experiment runner for orthonormal spline systems: knot families, the
//! check battery, sign-pattern trials and report files.

pub mod checks;
pub mod config;
pub mod experiment;
pub mod families;
pub mod report;
pub mod streams;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, unconditionality_trial, UnconditionalityReport};
pub use report::VerificationReport;
