//! Library side of the `pacbam` command-line tool.

pub mod artifact;
pub mod bench;
pub mod commands;
pub mod io;

pub use commands::{run, Cli, UsageError};
