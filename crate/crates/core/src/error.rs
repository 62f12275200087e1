use alloc::string::String;
use core::fmt;

/// Errors raised by geometric operations.
#[derive(Debug, Clone, PartialEq)]
pub enum GeomError {
    /// A coordinate lies outside the chart domain.
    OutOfDomain { axis: usize, value: f64 },
    /// Array lengths disagree with the chart dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A field returned NaN or an infinity.
    NonFinite(&'static str),
    /// A matrix that had to be inverted is singular.
    Singular(&'static str),
    /// `1 - t(1 - P)` is not invertible; carries the offending eigenvalue.
    Resolvent { eigenvalue: f64 },
    /// Two vectors that must span a plane are (numerically) dependent.
    Degenerate(&'static str),
    /// A metric failed the positive-definiteness test.
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// Caller violated a documented precondition.
    Contract(String),
    /// Invalid chart description.
    InvalidChart(String),
    /// A supposed Killing field is not Killing.
    NotKilling { field: usize, residual: f64 },
    /// The vertical distribution is not integrable.
    NotIntegrable { residual: f64 },
    /// A torus immersion is not doubly periodic.
    NotPeriodic { residual: f64 },
    /// Unknown catalog name.
    UnknownEntry(String),
}

pub type Result<T> = core::result::Result<T, GeomError>;

impl fmt::Display for GeomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeomError::OutOfDomain { axis, value } => {
                write!(f, "coordinate {axis} = {value} is outside the chart domain")
            }
            GeomError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            GeomError::NonFinite(what) => write!(f, "non-finite value in {what}"),
            GeomError::Singular(what) => write!(f, "singular matrix: {what}"),
            GeomError::Resolvent { eigenvalue } => {
                write!(f, "1 - t(1 - P) is singular (eigenvalue {eigenvalue:e})")
            }
            GeomError::Degenerate(what) => write!(f, "degenerate input: {what}"),
            GeomError::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "metric is not positive-definite (min eigenvalue {min_eigenvalue:e})")
            }
            GeomError::Contract(msg) => write!(f, "contract violation: {msg}"),
            GeomError::InvalidChart(msg) => write!(f, "invalid chart: {msg}"),
            GeomError::NotKilling { field, residual } => {
                write!(f, "field {field} is not Killing (residual {residual:e})")
            }
            GeomError::NotIntegrable { residual } => {
                write!(f, "vertical distribution is not integrable (residual {residual:e})")
            }
            GeomError::NotPeriodic { residual } => {
                write!(f, "immersion is not doubly periodic (residual {residual:e})")
            }
            GeomError::UnknownEntry(name) => write!(f, "unknown catalog entry `{name}`"),
        }
    }
}

impl core::error::Error for GeomError {}

pub(crate) fn contract(msg: impl Into<String>) -> GeomError {
    GeomError::Contract(msg.into())
}
