//! Library behind the `sakf` binary: run-config parsing, CSV trace
//! emission, summary output, and SVG chart rendering.
//!
//! The binary is a thin shell — every number it writes is produced by
//! `sakf-core` library calls and formatted here, so tests can reproduce
//! any output file byte for byte without spawning a process.

pub mod config;
pub mod svg;
pub mod trace;

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or invalid configuration, unknown names. Exit code 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Numerical or runtime failure during execution. Exit code 3.
    #[error("runtime error: {0}")]
    Runtime(String),
    /// Filesystem failure. Exit code 4.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
