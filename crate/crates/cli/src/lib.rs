//! Library side of the `fcomp` command-line tool.
//!
//! The binary is a thin clap wrapper over [`commands`]; everything it reads
//! and writes is defined in [`config`], [`files`] and [`report`].

pub mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod presets;
pub mod report;

pub use error::{CliError, Result};
