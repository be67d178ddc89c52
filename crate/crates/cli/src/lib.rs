//! Batch front-end for the `fourval` pricing library: JSON job files, strike
//! by maturity grids written as CSV and plot data, and small demonstrations.

pub mod bench;
pub mod config;
pub mod grid;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fourval::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed data: {0}")]
    Parse(String),
    #[error("{failed} of {total} grid rows failed")]
    Rows { failed: usize, total: usize, config: bool },
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Core(e) => core_exit_code(e),
            CliError::Rows { config, .. } => {
                if *config {
                    2
                } else {
                    3
                }
            }
        }
    }
}

pub fn core_exit_code(e: &fourval::Error) -> i32 {
    match e {
        fourval::Error::Parameter(_) | fourval::Error::Infeasible(_) => 2,
        _ => 3,
    }
}
