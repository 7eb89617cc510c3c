//! Command-line harness around `qzs-core`: instance files, solver runs
//! with structured traces, benchmark grids, an SDP front end, and a
//! runtime verification suite.
//!
//! File formats are JSON throughout: instances and summaries as single
//! documents, traces as JSONL with one record per line, benchmark
//! results as CSV. Every randomized command records a manifest that
//! reruns the command bitwise-identically.

pub mod checks;
pub mod dto;
pub mod gen;
pub mod run;

use std::path::Path;

/// Why a command could not complete. `exit_code` maps the failure onto
/// the fixed CLI contract: 1 for input problems, 2 for a solver that
/// stopped above its target.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {detail}")]
    Json { path: String, detail: String },
    #[error("{0}")]
    Core(qzs_core::Error),
    #[error("{0}")]
    Input(String),
}

impl From<qzs_core::Error> for CliError {
    fn from(e: qzs_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(qzs_core::Error::DidNotConverge { .. }) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
