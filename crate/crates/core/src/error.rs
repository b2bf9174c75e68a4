use core::fmt;

use alloc::string::String;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands that must share a dimension do not.
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    /// A scenario or gain value violates its contract.
    Config(String),
    /// The half-space `a·u ≥ b` has `a = 0` and `b > 0`.
    InfeasibleConstraint { b: f64 },
    /// `det M(q)` fell below the solver threshold.
    SingularInertia { det: f64 },
    /// A state entry became non-finite or exceeded the divergence bound.
    Divergence { t: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, found {found}")
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::InfeasibleConstraint { b } => {
                write!(f, "infeasible constraint: a = 0 with b = {b:e} > 0")
            }
            Error::SingularInertia { det } => write!(f, "singular inertia matrix (det = {det:e})"),
            Error::Divergence { t } => write!(f, "state diverged at t = {t}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}
