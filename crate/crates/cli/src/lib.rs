//! Configuration, caching, artifact output and the acceptance suite of the
//! `dimer` command.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use config::{parse_config, RunConfig};
pub use error::CliError;
