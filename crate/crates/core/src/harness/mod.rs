//! Experiment configuration, seeded replication, CSV output and the canned
//! Figure-1 style suite.

mod config;
mod figure1;
mod props;
mod run;

pub use config::{
    AlgorithmConfig, ExperimentConfig, MetricsConfig, ProblemConfig, ProblemFamily, Schedule, StepBase,
    StepConfig, DEFAULT_GAMMA_GRID,
};
pub use figure1::{figure1_configs, figure1_suite, Figure1Report, Figure1Run, Scale, ScaleParams};
pub use props::{run_property_suite, PropertyOutcome};
pub use run::{
    prepare, prepare_check, run_experiment, write_aggregate_csv, write_trajectory_csv, ExperimentOutcome,
    GroupSummary, Prepared, SeedSummary, CSV_HEADER,
};
