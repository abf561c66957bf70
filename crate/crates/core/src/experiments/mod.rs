//! Config-driven convergence experiments.

mod config;
mod gaussian;
mod logistic;
mod output;
mod rate;

pub use config::{DataConfig, ExperimentConfig, ExperimentKind, MmdConfig, SyntheticData};
pub use gaussian::run_gaussian_experiment;
pub use logistic::run_logistic_experiment;
pub use output::{median_by_n, run_experiment, write_outputs, Manifest, ResultRow, RunResult};
pub use rate::fit_rate;
