mod encode;
mod session;

pub use encode::{encode, encode_body, sort_name, symbol};
pub use session::{Solver, SolverConfig, SolverStats};

use thiserror::Error;

/// Outcome of a validity query. `Invalid` carries a model when the solver
/// produced one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(Option<String>),
    Unknown(String),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmtError {
    #[error("solver crashed: {0}")]
    SolverCrash(String),
    #[error("solver protocol error: {0}")]
    ProtocolError(String),
    #[error("unsupported in encoding: {0}")]
    Unsupported(String),
    #[error("solver not found: {0}")]
    SolverNotFound(String),
}
