//! File formats, pipeline stages and the command-line front end for the
//! `erpipe-core` entity resolution algorithms.

pub mod config;
pub mod csv;
pub mod formats;
pub mod pipeline;
pub mod similarity;
pub mod synthetic;

pub use config::{LoadedConfig, PipelineConfig};
pub use pipeline::{Pipeline, Stage, StageError, StageReport, STAGES};
