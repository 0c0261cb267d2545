//! Data loading, experiment orchestration, reports and the `ftp` command
//! line on top of `ftp-core`.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod model;
pub mod report;
pub mod verify;

pub use config::{ArchFamily, Overrides, RunConfig};
pub use error::{LabError, Result};
