//! Experiment orchestration for the wave-turbulence laboratory: TOML
//! configs, runners that call into `wtlab-core`, CSV outputs, run
//! manifests and PDF comparison reports.

pub mod compare;
pub mod config;
pub mod manifest;
pub mod output;
pub mod runners;

pub use compare::{compare_report, read_series, CompareReport, Series};
pub use config::{load_config, ExperimentConfig, ExperimentKind};
pub use manifest::{Check, RunManifest};
pub use runners::run_experiment;
pub use wtlab_core;
