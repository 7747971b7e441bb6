//! Configuration-driven ensemble runs, CSV tables and verification suites
//! on top of `qcrevival-core`.

pub mod config;
pub mod error;
pub mod format;
pub mod hist;
pub mod records;
pub mod run;
pub mod tables;
pub mod verify;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Result};
pub use run::CellStats;
