//! Synthetic experiments: dataset generation, Monte Carlo orchestration and CSV output.

mod config;
mod dataset;
mod metrics;
mod runner;
pub mod verify;

pub use config::{
    AlgorithmSpec, ConfigFile, ExperimentConfig, GraphSpec, Noise, SagaStepSpec, Scenario, ScheduleSpec,
};
pub use dataset::{generate_dataset, Dataset};
pub use metrics::{mean_local_error, relative_error};
pub use runner::{
    run_algorithm, run_benchmark, trial_seed, write_outputs, BenchReport, CurvePoint, MeanPoint, TrialCurve,
};
