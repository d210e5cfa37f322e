use thiserror::Error;

/// Errors raised by samplers, diagnostics and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum McmcError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid chain state: {0}")]
    InvalidState(String),

    #[error("finite-difference stencil left the support at coordinate {coordinate}")]
    Stencil { coordinate: usize },

    #[error("proposal produced a non-finite coordinate at index {index}")]
    Proposal { index: usize },

    #[error("full conditional for coordinate {index} produced a non-finite draw")]
    Conditional { index: usize },

    #[error("matrix decomposition failed: {0}")]
    Decomposition(String),

    #[error("degenerate chain: {0}")]
    DegenerateChain(String),

    #[error("step-size initialization failed after {iterations} iterations")]
    Initialization { iterations: usize },

    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("surrogate fit failed: {0}; try a larger ridge")]
    SurrogateFit(String),

    #[error("tuning failed after {evaluations} pilot runs: every pilot was degenerate")]
    TuningFailed {
        evaluations: usize,
        trace: Vec<crate::adaptation::TuningRecord>,
    },

    #[error("configuration invalid: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("io error: {0}")]
    Io(String),
}

impl McmcError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        McmcError::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for McmcError {
    fn from(e: std::io::Error) -> Self {
        McmcError::Io(e.to_string())
    }
}

pub type Result<T, E = McmcError> = std::result::Result<T, E>;
