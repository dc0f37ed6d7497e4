//! Command-line front end: `MatrixDocument` JSON I/O, run configuration and
//! report rendering for the `spectral-witness` binary.

pub mod args;
pub mod commands;
pub mod document;
pub mod report;

pub use args::{Cli, Command, RunConfig};
pub use document::{DocumentError, Kind, MatrixDocument};
pub use report::{CliError, Outcome, Status};
