//! `rbc`: command-line front end for the resonant beam charging link model.

pub mod axis;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod table;

pub use commands::{run, Cli};
pub use error::CliError;
