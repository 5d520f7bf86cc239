//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty domain: {0}")]
    EmptyDomain(String),
    #[error("invalid range: {0}")]
    Range(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
    #[error("precision exhausted: {requested} bits requested, {available} available (supply at least {required_digits} decimal digits)")]
    PrecisionExhausted {
        requested: u32,
        available: u32,
        required_digits: u32,
    },
    #[error("ambiguous floor: cannot decide whether the value reaches {candidate}")]
    AmbiguousFloor { candidate: String },
    #[error("precision: {0}")]
    Precision(String),
    #[error("budget exceeded in {what}: {count} candidates over limit {limit}")]
    Budget { what: String, count: String, limit: String },
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("degenerate relations: {0}")]
    DegenerateRelations(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("resolution too coarse: {0}")]
    Resolution(String),
    #[error("truncation bound unattainable: {0}")]
    Truncation(String),
    #[error("counterexample at n = {n}: {check}")]
    Counterexample { n: u64, check: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }

    pub fn budget(what: impl Into<String>, count: impl ToString, limit: impl ToString) -> Self {
        Error::Budget {
            what: what.into(),
            count: count.to_string(),
            limit: limit.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 for invalid input, 3 for
    /// precision or budget exhaustion, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EmptyDomain(_)
            | Error::Range(_)
            | Error::Validation(_)
            | Error::Parse { .. }
            | Error::TypeMismatch(_) => 2,
            Error::PrecisionExhausted { .. }
            | Error::AmbiguousFloor { .. }
            | Error::Precision(_)
            | Error::Budget { .. }
            | Error::Capacity(_)
            | Error::Resolution(_)
            | Error::Truncation(_) => 3,
            _ => 1,
        }
    }
}
