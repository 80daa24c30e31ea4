use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter was rejected before any computation started.
    InvalidConfig(String),
    /// Adaptive precision hit the hard ceiling without reaching a decision.
    PrecisionExceeded { bits: u32, context: &'static str },
    /// An enclosure straddles an integer, so its floor (and hence psi)
    /// cannot be read off at the current precision. Callers are expected
    /// to re-evaluate the input at higher precision.
    IndeterminateFloor { bits: u32 },
    /// A sieve or table would exceed the configured memory budget.
    CapacityExceeded(String),
    /// A fit or scan was asked to draw conclusions from too few points.
    InsufficientData(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::PrecisionExceeded { bits, context } => {
                write!(f, "precision ceiling of {bits} bits exceeded in {context}")
            }
            Error::IndeterminateFloor { bits } => {
                write!(f, "enclosure straddles an integer at {bits} bits")
            }
            Error::CapacityExceeded(msg) => write!(f, "capacity exceeded: {msg}"),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 bad config, 3 precision, 4 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::InsufficientData(_) => 2,
            Error::PrecisionExceeded { .. } | Error::IndeterminateFloor { .. } => 3,
            Error::CapacityExceeded(_) => 4,
        }
    }
}
