use thiserror::Error;

/// Errors raised by the simulator, the verifier and the optimizer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bit string {string:#b} has weight {found}, expected {expected}")]
    WrongWeight { string: u64, found: u32, expected: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("projectors do not resolve the identity (defect {defect:.3e})")]
    IncompleteProjectors { defect: f64 },

    #[error("no Dicke-component statistics: theta_minus cannot be recovered")]
    GhzCollapse,

    #[error("problem size {size} exceeds the supported limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("copy source exhausted after {produced} copies")]
    SourceExhausted { produced: u64 },

    #[error("restart cap of {cap} exhausted after {accepted_rounds} accepted rounds")]
    RestartCapExhausted { cap: u64, accepted_rounds: u64 },

    #[error("transcript invariant violated: {0}")]
    Transcript(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
