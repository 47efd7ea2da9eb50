//! Seeded batch runner: every experiment reads an [`ExperimentConfig`],
//! produces a [`Report`] and is rendered as CSV or JSON.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, ToleranceOverrides};
pub use experiments::{Experiment, ExperimentRegistry, FnExperiment};
pub use report::{fmt_float, Cell, Check, Report, Row};
