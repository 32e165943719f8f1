//! Configuration, factor cache, reporting and command dispatch for the `orbitforge` binary.

pub mod app;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use cache::FactorCache;
pub use commands::{run_command, Command};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
