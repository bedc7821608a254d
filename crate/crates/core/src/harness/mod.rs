//! Experiment plumbing: loading samples, synthetic data, multi-judge
//! fusion, multi-seed runs and report files.

pub mod experiment;
pub mod fuse;
pub mod load;
pub mod report;
pub mod synth;

pub use experiment::{
    run_experiment, ExperimentConfig, ExperimentOutput, ExperimentReport, SCHEMA,
};
pub use fuse::{fuse, Fused};
pub use load::{load_samples, parse_samples, Loaded};
pub use report::{emit_report, load_report, render_summary};
pub use synth::{generate, Generator, SyntheticData, SyntheticSpec};
