use thiserror::Error;

/// Which side of an identity an evaluation error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lhs,
    Rhs,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Lhs => f.write_str("lhs"),
            Side::Rhs => f.write_str("rhs"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("term cap exceeded in {what} after {terms} terms")]
    CapExceeded { what: &'static str, terms: usize },

    #[error("pole: {0}")]
    Pole(String),

    #[error("divergent series: {0}")]
    Divergence(String),

    #[error("insufficient terms for acceleration: need at least {need}, got {got}")]
    InsufficientTerms { need: usize, got: usize },

    #[error("numerical breakdown: {0}")]
    Breakdown(String),

    #[error("non-convergent q-integral: {0}")]
    NonConvergence(String),

    #[error("invalid precision context: {0}")]
    InvalidContext(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("exponent overflow: |{0}| exceeds 100")]
    ExponentOverflow(String),

    #[error("unknown identity id '{0}'")]
    UnknownId(String),

    #[error("duplicate identity id '{0}'")]
    DuplicateId(String),

    #[error("{id}: domain violation: {constraint}")]
    DomainViolation { id: String, constraint: String },

    #[error("{side} evaluation failed: {source}")]
    Evaluation {
        side: Side,
        #[source]
        source: Box<Error>,
    },

    #[error("missing parameter '{0}'")]
    MissingParam(String),

    #[error("sampling failed for '{id}': no admissible point in {draws} draws")]
    SamplingFailure { id: String, draws: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
