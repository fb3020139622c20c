use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input rejected before any computation (out-of-range coordinates,
    /// undersized network, negative noise, ...). `field` names the offending
    /// value.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// The target coincides with (or is numerically at) a station.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A least-squares or covariance solve could not be carried out.
    #[error("estimation failed: {reason} (condition number {condition:.3e})")]
    Estimation { reason: String, condition: f64 },

    /// Three-sphere intersection has no real solution.
    #[error("no sphere intersection: {0}")]
    NoIntersection(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn estimation(reason: impl Into<String>, condition: f64) -> Self {
        Error::Estimation {
            reason: reason.into(),
            condition,
        }
    }

    /// True for errors that come from bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. })
    }
}
