//! Library surface of the command line front end, exposed so that
//! integration tests can drive the same scenario, output and orchestration
//! code paths as the binary.

pub mod output;
pub mod run;
pub mod scenario;

use spindrift_core::error::ErrorClass;
use spindrift_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Precondition => 3,
                ErrorClass::Numerical => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}
