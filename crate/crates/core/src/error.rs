use thiserror::Error;

/// Failure modes shared by every numerical kernel in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// The argument hits a pole of a meromorphic function.
    #[error("pole of {op} at {at}")]
    Pole { op: &'static str, at: String },

    /// An iterative method failed to converge.
    #[error("numerical failure in {op} at lambda = {lambda}, s = {s}: {detail}")]
    Numerical {
        op: &'static str,
        lambda: f64,
        s: f64,
        detail: String,
    },

    /// A quadrature or truncation tolerance could not be met.
    #[error("accuracy error in {op}: {detail}")]
    Accuracy { op: &'static str, detail: String },

    /// The operation needs state that has not been established yet.
    #[error("state error in {op}: {detail}")]
    State { op: &'static str, detail: String },

    /// The requested integral does not converge.
    #[error("divergent integral in {op}: {detail}")]
    Divergent { op: &'static str, detail: String },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn accuracy(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Accuracy {
            op,
            detail: detail.into(),
        }
    }

    /// Name of the operation that raised the error.
    pub fn operation(&self) -> &'static str {
        match self {
            Error::Domain { op, .. }
            | Error::Pole { op, .. }
            | Error::Numerical { op, .. }
            | Error::Accuracy { op, .. }
            | Error::State { op, .. }
            | Error::Divergent { op, .. } => op,
        }
    }

    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. } | Error::Pole { .. } | Error::Divergent { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
