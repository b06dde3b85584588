use core::fmt;

/// Errors raised by the models and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration field failed validation.
    Config {
        field: &'static str,
        reason: &'static str,
    },
    /// An argument is outside the mathematical domain of the operation.
    Domain(&'static str),
    /// Vector or matrix dimensions do not line up.
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// Offloading was chosen with a zero rate or zero allocated frequency.
    InfeasibleOffload { vehicle: usize },
    /// A task record carries cost on both the local and the offload branch.
    Accounting { index: usize },
    /// The revenue log was evaluated past the deadline slack.
    DeadlineViolation,
    /// A caller-side precondition does not hold.
    Precondition(&'static str),
    /// Training was requested on an empty elite buffer.
    EmptyBuffer,
    /// The brute-force oracle refuses instances above its enumeration guard.
    TooLarge(&'static str),
    /// A serialized blob could not be decoded.
    Format(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config { field, reason } => write!(f, "invalid config field `{field}`: {reason}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Shape {
                what,
                expected,
                got,
            } => write!(f, "shape mismatch for {what}: expected {expected}, got {got}"),
            Error::InfeasibleOffload { vehicle } => {
                write!(f, "vehicle {vehicle} offloads with zero rate or zero allocated frequency")
            }
            Error::Accounting { index } => {
                write!(f, "record {index} charges both the local and the offload branch")
            }
            Error::DeadlineViolation => write!(f, "completion delay exceeds deadline slack"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::EmptyBuffer => write!(f, "elite buffer is empty"),
            Error::TooLarge(msg) => write!(f, "instance too large for enumeration: {msg}"),
            Error::Format(msg) => write!(f, "malformed data: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape {
            what,
            expected,
            got,
        })
    }
}
