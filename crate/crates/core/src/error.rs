use thiserror::Error;

/// Errors raised while reading a theory file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("arity mismatch at {line}:{col}: `{name}` expects {expected} argument(s), got {found}")]
    Arity {
        line: usize,
        col: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable `{name}` at {line}:{col}")]
    Unbound { line: usize, col: usize, name: String },
    #[error("duplicate symbol `{name}` at {line}:{col}")]
    Duplicate { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("limit exceeded: {what} would produce about {estimate} items (limit {limit})")]
    LimitExceeded {
        what: String,
        estimate: String,
        limit: u64,
    },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("free variable x{0} has no assignment")]
    Unassigned(usize),
    #[error("ill-formed formula: {0}")]
    IllFormed(String),
    #[error("headroom violated: {0}")]
    Headroom(String),
    #[error("relation is not functional: {0}")]
    NotFunctional(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
