//! Experiment orchestration: configs, result tables, the experiment kinds,
//! figure data and the `nqr-lab` command line.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod figures;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind, Theta0Grid};
pub use experiments::{run_experiment, RunFailure, RunOutput};
pub use table::{Cell, ResultTable};
