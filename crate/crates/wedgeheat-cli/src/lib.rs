//! Batch front door for `wedgeheat-core`.
//!
//! The library half of the `wedgeheat` binary: TOML run configurations
//! ([`config`]), subcommand implementations ([`commands`]), CSV/JSON
//! artifact writers ([`output`]), and a thread-parallel heat-trace driver
//! ([`parallel`]) whose results are bit-for-bit identical at every thread
//! count.

#![deny(unsafe_code)]
#![warn(missing_docs)]

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;
pub mod sample;

pub use wedgeheat_core::CoreError;

/// Errors surfaced by the command layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The configuration file is missing, malformed, or fails validation.
    /// The message names the offending key path.
    #[error("{0}")]
    Config(String),
    /// A filesystem operation on an input or output path failed.
    #[error("{path}: {source}")]
    Io {
        /// The path involved.
        path: PathBuf,
        /// The underlying error.
        #[source]
        source: std::io::Error,
    },
    /// An error propagated from the computation kernel.
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// Map the error to the documented process exit codes: 2 for
    /// configuration and environment problems, 3 for numerical refusals
    /// (a fit over threshold, a model without a closed-form spectrum),
    /// 4 for internal invariant violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(core) => match core {
                CoreError::InvalidArgument { .. } => 2,
                CoreError::FitRefused { .. } | CoreError::SpectrumUnavailable => 3,
                _ => 4,
            },
        }
    }

    /// Short category label used in the structured error line.
    pub fn category(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "refusal",
            _ => "invariant",
        }
    }
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CliError>;
