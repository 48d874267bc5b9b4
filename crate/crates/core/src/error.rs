use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("instance needs an even number of at least 2 vertices, got {0}")]
    OddOrEmpty(usize),

    #[error("line points must be strictly increasing (index {index}: {prev} then {next})")]
    NotStrictlyIncreasing { index: usize, prev: i64, next: i64 },

    #[error("cost matrix is not square at row {row}")]
    NotSquare { row: usize },

    #[error("cost matrix entry ({row},{col}) is invalid: {reason}")]
    BadCost { row: usize, col: usize, reason: &'static str },

    #[error("triangle inequality violated: c({a},{c}) > c({a},{b}) + c({b},{c})")]
    Triangle { a: usize, b: usize, c: usize },

    #[error("arrivals must be a non-empty, even-length list, got {0} entries")]
    BadArrivals(usize),

    #[error("vertex {vertex} out of range for an instance with {size} vertices")]
    VertexOutOfRange { vertex: usize, size: usize },

    #[error("pair ({0},{0}) is a self-loop")]
    SelfLoop(usize),

    #[error("vertex {0} is covered by more than one pair")]
    NotDisjoint(usize),

    #[error("matching is not perfect: vertex {0} is uncovered")]
    NotPerfect(usize),

    #[error("edge set is not a matching inside the line: edges {0} and {1} are adjacent")]
    NotLineMatching(usize, usize),

    #[error("edge set has {got} bits but the line has {expected} edges")]
    EdgeCountMismatch { expected: usize, got: usize },

    #[error("interval [{lo},{hi}] is invalid for a line with {edges} edges")]
    BadInterval { lo: usize, hi: usize, edges: usize },

    #[error("exact oracle capacity exceeded: {what} is {got}, limit {limit}")]
    Capacity { what: &'static str, got: usize, limit: usize },

    #[error("cannot build a matching with {pairs} pairs on {vertices} vertices")]
    InfeasibleSize { pairs: usize, vertices: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Returns `Error::Invariant` unless `cond` holds.
macro_rules! ensure_invariant {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err($crate::Error::Invariant(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure_invariant;
