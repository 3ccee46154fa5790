//! Config-driven runs, comparisons and verification suites on top of
//! `stam-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod setup;
pub mod trace;
pub mod verify;

pub use config::RunConfig;
pub use error::{CliError, Result};
