//! Run driver for the Meissner-state laboratory: JSON experiment configs,
//! provenance-stamped CSV tables, SVG line plots and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod error;
pub mod plot;
pub mod run;
pub mod table;

pub use error::{CliError, ErrorReport};
