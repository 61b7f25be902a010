use thiserror::Error;

/// Numeric failures raised by the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The root finder could not certify a factorization.
    #[error("root finding did not converge: {0}")]
    NonConvergence(String),
    /// An initial-value system could not be solved.
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    /// A real form was requested for a function that has none.
    #[error("function is not closed under complex conjugation")]
    NotConjugateClosed,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
