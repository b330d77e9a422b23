//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A query point exceeds the range a table was built for.
    #[error("{what} = {value} is out of range (table limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    /// A sieve limit exceeds the configured memory budget.
    #[error("requested limit {requested} exceeds the {what} budget of {budget}")]
    ResourceBudget {
        what: &'static str,
        requested: u64,
        budget: u64,
    },

    /// A real parameter is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structurally invalid argument (bad vector lengths, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation required a verified basis/complement and the check failed.
    #[error("precondition failed: {what} is not verified (first unrepresentable n = {first_failure})")]
    NotVerified {
        what: &'static str,
        first_failure: u64,
    },

    /// Target outside the reachable interval of a sign series.
    #[error("target {target} outside the feasible interval [{lo}, {hi}]")]
    InfeasibleTarget { target: f64, lo: f64, hi: f64 },

    /// The series dominance condition failed where it was required to hold.
    #[error("dominance condition violated at index {index}: q = {term} exceeds tail {tail}")]
    DominanceViolated { index: usize, term: f64, tail: f64 },

    /// The Mertens adjustment ran out of adjustable elements.
    #[error("target log({target}) unreachable; achievable interval is [{lo}, {hi}]")]
    AdjustUnreachable { target: f64, lo: f64, hi: f64 },

    /// No admissible block size below the search bound.
    #[error("no block size N <= {max_tried} gives two elements of each class and a pair r < s in every block")]
    BlockSizeNotFound { max_tried: usize },

    /// An internal consistency guarantee failed; indicates a bug.
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
