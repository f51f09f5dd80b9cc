//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("polynomial is constant")]
    DegreeZero,
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("polynomial is reducible over Q")]
    NotIrreducible,
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("reconstruction failed: {0}")]
    ReconstructionFailed(String),
    #[error("element not in the subgroup spanned by the basis: {0}")]
    NotInSubgroup(String),
    #[error("basis elements are multiplicatively dependent: {0}")]
    DependentBasis(String),
    #[error("basis is not 2-saturated: {0}")]
    UnsaturatedBasis(String),
    #[error("logarithm branch does not exponentiate to the field value: {0}")]
    BranchInvalid(String),
    #[error("degenerate five-term tuple: {0}")]
    DegenerateTuple(String),
    #[error("not a flattening: {0}")]
    NotAFlattening(String),
    #[error("lift inconsistent with embedding: {0}")]
    LiftInconsistent(String),
    #[error("real embedding produced non-real value: {0}")]
    RealSlotNotReal(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("no torsion order found")]
    NotTorsion,
    #[error("cochain is not ideal: {0}")]
    NotIdeal(String),
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("not in general position: {0}")]
    NotGeneralPosition(String),
    #[error("edge condition failed: {0}")]
    EdgeConditionFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::PrecisionExhausted(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
