//! Library half of the `driftlap` command-line tool: configuration,
//! experiment drivers, and report emission. The binary in `main.rs` is a
//! thin argument-parsing shell over these.

pub mod config;
pub mod experiment;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("output collision: {path} already exists; runs never merge, use a fresh --out")]
    OutputCollision { path: String },

    #[error(transparent)]
    Core(#[from] driftlap::Error),
}
