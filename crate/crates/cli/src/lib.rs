//! Command-line front end for `qhj-impulse`.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod plot;
pub mod verify;

pub use app::{run, Cli};
pub use config::RunConfig;
pub use error::CliError;
