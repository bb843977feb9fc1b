//! Command-line driver: configuration, custom problem files, execution and
//! CSV output.

pub mod config;
pub mod expr;
pub mod output;
pub mod problem;
pub mod run;

use std::path::PathBuf;

use pseudoparabolic::ErrorKind;
use thiserror::Error;

pub use config::{ConfigError, RunConfig};
pub use run::execute;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{origin}: {key}: {source}")]
    Expr {
        origin: config::Origin,
        key: String,
        source: expr::ExprError,
    },
    #[error(transparent)]
    Solver(#[from] pseudoparabolic::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for identifiability failures, 3 for assumption violations, 1 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) => match e.kind() {
                ErrorKind::Identifiability => 2,
                ErrorKind::AssumptionViolation => 3,
                _ => 1,
            },
            _ => 1,
        }
    }
}
