//! Experiment runner for the perconet toolkit: config validation, seeded
//! execution on a worker pool, and CSV/JSON/DOT output.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{validate, validate_value, Experiment, ExperimentConfig, FieldError, ValidationErrors};
pub use experiments::{growth_shape, run, run_with_threads, schema_tag, GrowthShape, RunOutput, SCHEMA_VERSION};
pub use output::{write_outputs, OutputPaths};
