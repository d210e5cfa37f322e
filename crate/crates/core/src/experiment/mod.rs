//! Config-driven experiments: single runs with report files, paired
//! comparisons and named benchmark bundles, dimension-scaling studies, and
//! a quick self-test.

mod compare;
mod config;
mod output;
mod runner;
mod scaling;
mod selftest;

pub use compare::{bundle, run_comparison, write_comparison, write_comparison_csv, ComparisonRow, BUNDLES, COMPARISON_FILE};
pub use config::{
    AdaptConfig, AutoStep, ExperimentConfig, InitMode, InitSpec, MassSpec, ReportFormat, SamplerSpec, StepSize,
    WarmupSource, SCHEMA_ID,
};
pub use output::{
    execute, run_experiment, RunOutputs, RunResult, DIAGNOSTICS_CSV, DIAGNOSTICS_JSON, MANIFEST_FILE, SAMPLES_FILE,
};
pub use runner::{run_chain, run_chains, AdaptedParams, ChainOutput};
pub use scaling::{log_log_slope, run_scaling_study, with_dim, ScalingRow, ScalingStudy, ScalingSummary, SCALING_FILE};
pub use selftest::{selftest, SelftestCheck};
