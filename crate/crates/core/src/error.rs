use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: {requested} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        requested: u128,
        cap: u128,
    },
    #[error("sieve limit {0} exceeds 2^40")]
    LimitExceeded(u64),
    #[error("{value} is outside the table range (limit {limit})")]
    OutOfRange { value: u64, limit: u64 },
    #[error("operation requires a digit set with exactly q-1 digits, got {got} of {q}")]
    WrongShape { q: u32, got: usize },
    #[error(
        "power iteration did not converge after {iterations} steps (last estimate {estimate})"
    )]
    NotConverged { estimate: f64, iterations: usize },
    #[error("cumulative event measure did not reach 1 before cap R = {0}")]
    NotReached(u64),
    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("{0} has a prime factor above the trial-division bound")]
    FactorizationTooHard(u64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Machine-readable kind string surfaced by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CapExceeded { .. } => "CapExceeded",
            Error::LimitExceeded(_) => "LimitExceeded",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::WrongShape { .. } => "WrongShape",
            Error::NotConverged { .. } => "NotConverged",
            Error::NotReached(_) => "NotReached",
            Error::Overflow(_) => "Overflow",
            Error::Unsupported(_) => "Unsupported",
            Error::FactorizationTooHard(_) => "FactorizationTooHard",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    pub(crate) fn cap(
        what: &'static str,
        requested: impl Into<u128>,
        cap: impl Into<u128>,
    ) -> Self {
        Error::CapExceeded {
            what,
            requested: requested.into(),
            cap: cap.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
