//! Batch front end: configuration, run manifests and the subcommands of the
//! `dyadnet` binary.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{run, Command, Overrides};
pub use config::PipelineConfig;
pub use manifest::{Manifest, MANIFEST_FILE};
