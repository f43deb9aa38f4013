//! Command-line runner and file output for the `ptide-core` experiments.
//!
//! Every run writes CSV tables (17 significant digits), optional SVG figures
//! and PGM rasters, and finally a `manifest.json` holding the resolved
//! configuration and a SHA-256 digest of each file.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod selftest;
pub mod svg;
pub mod sweep;

pub use config::RunConfig;
pub use error::{LabError, Result};
