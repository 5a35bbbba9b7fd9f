use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("variable lists differ: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),

    #[error("matrix has {rows} rows and {cols} columns; a guaranteed kernel needs more columns than rows")]
    NotEnoughColumns { rows: usize, cols: usize },

    #[error("not in subalgebra: {0}")]
    NotInSubalgebra(String),

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("denominator vanishes at the origin, no power series expansion")]
    SingularAtOrigin,

    #[error("truncation exhausted: valid order {valid} cannot absorb order {order}")]
    TruncationExhausted { valid: i64, order: i64 },

    #[error("verification window empty: valid order {valid} < operator order {order}, deepen the truncation")]
    EmptyWindow { valid: i64, order: i64 },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("exponent {0:?} has support outside the reduction set")]
    UnsupportedExponent(Vec<u32>),

    #[error("kernel trivial at bounding N: {0}")]
    KernelTrivial(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("bound violated: {0}")]
    BoundViolated(String),

    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
