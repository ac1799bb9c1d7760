use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} budget exceeded: requested {requested}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("element {0} does not belong to the poset")]
    ForeignElement(String),

    #[error("three-level poset is not regular: {vertex} has degree {degree}, expected {expected}")]
    NotRegular {
        vertex: String,
        degree: usize,
        expected: String,
    },

    #[error("edge weights are not a scaled normalized matching: {vertex} sums to {sum}, expected {expected}")]
    NotSnmf {
        vertex: String,
        sum: String,
        expected: String,
    },

    #[error("not a perfect matching: {0}")]
    NotPerfectMatching(String),

    #[error("invalid symmetric chain decomposition: {0}")]
    InvalidScd(String),

    #[error("vertex {0} has degree zero")]
    ZeroDegree(usize),

    #[error("poset admits no symmetric chain decomposition")]
    NoScd,

    #[error("internal error: {0}")]
    Internal(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error is caused by a size, budget or state cap.
    pub fn is_limit(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }

    pub(crate) fn budget(
        what: &'static str,
        requested: impl Into<u128>,
        limit: impl Into<u128>,
    ) -> Self {
        Error::BudgetExceeded {
            what,
            requested: requested.into(),
            limit: limit.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
