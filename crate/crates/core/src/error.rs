//! Error type shared by all modules.

use thiserror::Error as ThisError;

#[derive(Debug, Clone, PartialEq, Eq, ThisError)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("rewrite budget of {0} steps exceeded")]
    BudgetExceeded(usize),
    #[error("not a boundary condition: {0}")]
    NotABoundaryCondition(String),
    #[error("singular boundary problem")]
    SingularProblem,
    #[error("Wronskian is not invertible: {0}")]
    NotInvertibleWronskian(String),
    #[error("repeated characteristic root {0}")]
    RepeatedRoot(String),
    #[error("operator has no kernel representation: {0}")]
    NotAKernelOperator(String),
    #[error("no regular right factor among the given conditions")]
    NoRegularRightFactor,
    #[error("inclusion ambiguity between rules {0} and {1}")]
    InclusionAmbiguity(String, String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse { pos, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
