use thiserror::Error;

/// Errors produced by the engine. Each variant maps onto a distinct CLI exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input shape error: {0}")]
    InputShape(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("module is not C1-cofinite up to depth {depth}: {detail}")]
    NotCofiniteUpToDepth { depth: usize, detail: String },

    #[error("irregular singularity at z = 0 (pole order {0})")]
    IrregularSingularity(usize),

    #[error("log depth exceeded: exponent {exponent} needs more than {max_log} powers of log z")]
    LogDepthExceeded { exponent: String, max_log: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("internal invariant violation: {0}")]
    InternalInvariantViolation(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InputShape(_) => "InputShapeError",
            Error::Truncation(_) => "TruncationError",
            Error::NotCofiniteUpToDepth { .. } => "NotCofiniteUpToDepth",
            Error::IrregularSingularity(_) => "IrregularSingularity",
            Error::LogDepthExceeded { .. } => "LogDepthExceeded",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InternalInvariantViolation(_) => "InternalInvariantViolation",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
