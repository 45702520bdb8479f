//! Command-line front end for `qmeter`.
//!
//! Subcommands: `validate`, `estimate`, `fidelities`, `simulate`, `domain`,
//! `catalog`. Exit codes: 0 success, 1 parse or IO error, 2 domain or
//! validation error. `--json` switches every command to a single
//! machine-readable record on stdout.

pub mod commands;
pub mod error;
pub mod files;
pub mod report;

pub use commands::{run, Cli, Command};
pub use error::CliError;
