use thiserror::Error;

/// Errors produced by the hypergraph kernel and the algorithms built on it.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("vertex {vertex} is outside 1..={n}")]
    VertexOutOfRange { vertex: u32, n: usize },

    #[error("invalid edge {edge:?}: {reason}")]
    InvalidEdge { edge: Vec<u32>, reason: String },

    #[error("duplicate edge {0:?}")]
    DuplicateEdge(Vec<u32>),

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("search budget of {budget} branch nodes exhausted")]
    BudgetExhausted { budget: u64 },

    #[error("conditioned sampling exhausted after {tries} tries")]
    SamplingExhausted { tries: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible augmentation: n - km - eta*n = {0} < 0")]
    InfeasibleAugmentation(String),

    #[error("internal contradiction: {claim} failed on inputs meeting the preconditions")]
    InternalContradiction { claim: String },

    #[error("step {step} failed: {reason}")]
    StepFailure { step: String, reason: String },

    #[error("linear program is {0}")]
    Lp(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
