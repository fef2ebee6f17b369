//! Command-line front end for `cvsat-core`: scenario sweeps, post-selection
//! tables, effective-channel summaries and numerical diagnostics, all as
//! deterministic CSV or JSON.

pub mod commands;
pub mod scenario;
pub mod table;

pub use commands::{effective, postselect, rate_estimate, sweep, validate, RunOptions, ValidationReport};
pub use scenario::Scenario;
pub use table::{fmt_num, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("numerical error at {point}: {source}")]
    Numerical {
        point: String,
        #[source]
        source: cvsat_core::Error,
    },

    #[error("validation failed with {0} failure(s)")]
    Validation(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Validation(_) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
