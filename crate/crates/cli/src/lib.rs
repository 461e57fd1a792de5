//! Batch pipeline: sample shapes or textures, compute diagrams, build
//! template features, train and evaluate classifiers, all through files in
//! one run directory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod seeds;
pub mod stages;
pub mod textures;

pub use commands::{diagnose, distance, DiagnoseOptions, DistanceReport};
pub use config::{ExperimentConfig, ExperimentKind, ShapeClass, TextureConfig};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, AccuracyEntry, RunManifest, StageRecord};
pub use seeds::derive_seed;
