//! Process exit codes.

use ffmin_core::optimizers::Status;
use thiserror::Error;

pub const SUCCESS: i32 = 0;
/// Divergence, evaluation failure, I/O failure while writing results.
pub const FAILURE: i32 = 1;
pub const INPUT_ERROR: i32 = 2;
pub const LINESEARCH_FAILURE: i32 = 3;
pub const BUDGET_EXHAUSTED: i32 = 4;

pub fn for_status(status: Status) -> i32 {
    match status {
        Status::Converged => SUCCESS,
        Status::LinesearchFailure => LINESEARCH_FAILURE,
        Status::IterationBudget | Status::OracleBudget | Status::TimeBudget => BUDGET_EXHAUSTED,
        Status::Diverged | Status::EvaluationError => FAILURE,
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad file, bad flag combination or invalid configuration.
    #[error("{0:#}")]
    Input(anyhow::Error),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn input(msg: impl std::fmt::Display) -> Self {
        CliError::Input(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => INPUT_ERROR,
            CliError::Runtime(_) => FAILURE,
        }
    }
}
