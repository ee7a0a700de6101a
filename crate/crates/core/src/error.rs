use thiserror::Error;

/// Errors reported by the tabulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid election: {0}")]
    InvalidElection(String),

    #[error("weight vector error: {0}")]
    InvalidWeights(String),

    #[error("weight totals differ: p sums to {p_total}, q sums to {q_total}")]
    MarginalMismatch { p_total: String, q_total: String },

    #[error("matching does not fit election: {0}")]
    MatchingMismatch(String),

    #[error("expected integral weights/matching: {0}")]
    NonIntegral(String),

    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),

    #[error("unknown voter `{0}`")]
    UnknownVoter(String),

    #[error("veto order invalid: {0}")]
    InvalidOrder(String),

    #[error("bottom trading cycle invalid: {0}")]
    InvalidCycle(String),

    #[error("instance too large: {0}")]
    SizeLimit(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
