use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Two objects that must share a category count do not.
    DimensionMismatch { expected: usize, found: usize },
    /// A probability vector failed validation.
    InvalidProbability(String),
    /// Counts do not describe a point of the discrete simplex.
    InvalidCounts(String),
    /// Confidence level parameter outside `(0, 1)`.
    InvalidAlpha(f64),
    /// Any other argument outside its domain.
    InvalidArgument(String),
    /// A covering collection violates its structural invariants.
    InvalidCollection(String),
    /// The requested enumeration or sweep exceeds the configured work cap.
    ResourceCap { required: u128, cap: u128 },
    /// An iterative routine did not reach its tolerance.
    NonConvergence {
        routine: &'static str,
        iterations: usize,
    },
    /// The method cannot be used for this number of categories.
    Inapplicable { method: String, d: usize },
    /// Text input could not be parsed.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(
                    f,
                    "dimension mismatch: expected {expected} categories, found {found}"
                )
            }
            Error::InvalidProbability(msg) => write!(f, "invalid probability vector: {msg}"),
            Error::InvalidCounts(msg) => write!(f, "invalid counts: {msg}"),
            Error::InvalidAlpha(a) => write!(f, "alpha must lie in (0, 1), got {a}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidCollection(msg) => write!(f, "invalid covering collection: {msg}"),
            Error::ResourceCap { required, cap } => {
                write!(f, "work size {required} exceeds the configured cap {cap}")
            }
            Error::NonConvergence {
                routine,
                iterations,
            } => {
                write!(
                    f,
                    "{routine} did not converge after {iterations} iterations"
                )
            }
            Error::Inapplicable { method, d } => {
                write!(f, "method {method} is not applicable for d = {d}")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}
