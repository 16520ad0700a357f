//! Threads, files and the command line around `anisotable-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod formats;
pub mod manifest;
pub mod pool;

pub use anisotable_core as core;
pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{AppError, AppResult};
pub use manifest::{replay, run_and_record, RunManifest, RunRequest};
pub use pool::WorkerPool;
