//! Batch front end: reads a TOML run description, evaluates it with
//! `fracjump` and writes a CSV table plus a JSON metadata record.

pub mod build;
pub mod config;
pub mod expr;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{Command, RunConfig};
pub use run::{execute, run, Report};

/// Exit status for configuration and validation errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status when too many paths reach the time cap.
pub const EXIT_CENSORED: i32 = 4;
/// Exit status for I/O failures.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Numerical(#[from] fracjump::Error),

    #[error("{0}")]
    Censoring(String),

    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fracjump::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Censoring(_) => EXIT_CENSORED,
            CliError::Io { .. } => EXIT_IO,
            CliError::Numerical(e) => match e {
                E::Censored { .. } => EXIT_CENSORED,
                E::Pole(_)
                | E::Domain { .. }
                | E::InvalidParameter(_)
                | E::Smoothness(_)
                | E::OrderClass { .. }
                | E::DegenerateJump
                | E::BoundaryMismatch(_) => EXIT_CONFIG,
                E::NonConvergence(_) | E::Singularity | E::MajorantViolation { .. } | E::SingularSystem(_) => {
                    EXIT_NUMERICAL
                }
            },
        }
    }
}
