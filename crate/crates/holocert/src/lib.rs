//! Batch front end for `holocert-core`: scenario files, reports and the
//! command line.
//!
//! A scenario is a JSON document naming a model, an immersed torus and a task.
//! [`run_scenario`] validates and runs it and returns a [`RunReport`] plus CSV
//! tables; [`write_outputs`] puts them on disk. Reports are deterministic:
//! wall time goes to a separate `timing.json`.

pub mod catalog;
pub mod config;
pub mod expr;
pub mod run;

pub use catalog::list_builtins;
pub use config::{parse_scenario, Overrides, Scenario, Task};
pub use run::{run_scenario, write_outputs, RunOutcome, RunReport};

/// Version tag shared by scenarios, reports and the catalog.
pub const SCHEMA: &str = "holocert/1";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column} (at `{path}`): {message}")]
    Parse { path: String, line: usize, column: usize, message: String },

    #[error("invalid scenario: {field}: {message}")]
    Validation { field: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => EXIT_INVALID,
            CliError::Io { .. } | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}
