use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("prices must be strictly positive (p_min = {0})")]
    NonPositivePrice(f64),
    #[error("price bounds inverted: p_min = {p_min} > p_max = {p_max}")]
    BoundsInverted { p_min: f64, p_max: f64 },
    #[error("dissatisfaction price {alpha} is below p_min = {p_min}")]
    AlphaBelowPMin { alpha: f64, p_min: f64 },
    #[error("capacity must have a positive numerator and denominator (got {num}/{den})")]
    ZeroCapacity { num: u64, den: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("schedule has {schedule} slots but the trace has {trace}")]
    LengthMismatch { trace: usize, schedule: usize },
    #[error("schedule is infeasible: {0}")]
    InfeasibleSchedule(String),
    #[error("price {price} at slot {slot} lies outside [{p_min}, {p_max}]")]
    PriceOutOfRange {
        slot: usize,
        price: f64,
        p_min: f64,
        p_max: f64,
    },
    #[error("V(pi) diverges at pi = 1 when alpha <= p_max")]
    DegenerateAtPiOne,
    #[error("no bracket for the threshold price: {0}")]
    NoBracket(String),
    #[error("adaptive ratio denominator is non-negative ({0}); caller violated the price preconditions")]
    DenominatorSignViolation(f64),
    #[error("degenerate instance: {0}")]
    DegenerateSpec(String),
    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("no prices left after trimming")]
    EmptyAfterTrim,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("episode {date}, policy {policy}: {source}")]
    Episode {
        date: String,
        policy: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end: 1 for validation
    /// problems, 2 for file-system trouble, 3 when an algorithmic guarantee
    /// was breached.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Episode { source, .. } => source.exit_code(),
            Error::Io { .. } | Error::Format { .. } => 2,
            Error::InternalConsistency(_) | Error::DenominatorSignViolation(_) => 3,
            _ => 1,
        }
    }
}
