//! Command-line toolkit around `uidlab-core`: record formats, run
//! configuration, external scorer adapters and the subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod mock;
pub mod scorer;

pub use commands::{Context, Summary};
pub use config::RunConfig;
pub use error::{CliError, ParseError};
