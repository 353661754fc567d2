use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure kinds of the numerical core. Input problems and numerical breakdowns
/// are kept apart so callers can map them to different exit paths.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid parameters violate the discretization contract.
    Grid(String),
    /// Physical parameters out of range.
    Params(String),
    /// Field sizes or values inconsistent with the grid or mode.
    Field(String),
    /// Preconditions of a constant or certificate not met.
    Precondition(String),
    /// NaN, Inf or loss of positivity during evaluation.
    Numerical(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(m) => write!(f, "invalid grid: {m}"),
            Error::Params(m) => write!(f, "invalid parameters: {m}"),
            Error::Field(m) => write!(f, "invalid field: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl core::error::Error for Error {}
