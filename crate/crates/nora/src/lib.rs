//! File formats, experiment driver and command-line plumbing on top of
//! `nora-core`.

pub mod config_file;
pub mod dataset;
mod error;
pub mod experiment;
pub mod scenario_file;
pub mod training;
pub mod weights_file;

pub use error::{Error, Result};
