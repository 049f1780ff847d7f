use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A decision could not be made at the current precision. Retryable by
    /// [`crate::ball::PrecisionPolicy::escalate`].
    #[error("cannot certify {what} at {bits} bits")]
    Uncertified { what: &'static str, bits: u32 },

    #[error("precision escalation exhausted for {what} (cap {cap} bits)")]
    PrecisionExhausted { what: &'static str, cap: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exponent overflow in {0}")]
    Overflow(&'static str),

    #[error("term storage for n_max={n_max} needs about {needed} bytes, budget is {cap}")]
    MemoryBudget { n_max: i64, needed: u64, cap: u64 },

    #[error("epsilon not certified positive at any of {tried} convergents")]
    EpsilonNeverPositive { tried: usize },

    #[error("interrupted")]
    Interrupted,

    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("checkpoint decode: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Uncertified { .. })
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
