//! File formats, reports and commands for the `qds` command-line tool.
//!
//! The numerical work lives in [`qds_core`]; this crate reads model and
//! operator files, runs one analysis per command and writes a [`Report`].

pub mod commands;
pub mod format;
pub mod report;

pub use commands::{CliError, Flags, Outcome};
pub use report::Report;
