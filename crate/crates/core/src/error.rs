use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("{param} = {value} is out of range: expected {expected}")]
    Domain {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A numerical routine produced a non-finite or inconsistent value.
    #[error("numerical failure in {context}: {value}")]
    Numerical { context: &'static str, value: f64 },

    /// A covariance matrix violates the uncertainty principle or is not
    /// symmetric positive definite.
    #[error("unphysical covariance matrix ({reason}: {value})")]
    Unphysical { reason: &'static str, value: f64 },

    /// The effective-channel mapping only exists for entangled states.
    #[error("state is not entangled (partially transposed nu_minus = {nu_minus})")]
    NotEntangled { nu_minus: f64 },

    /// Post-selection kept (almost) nothing.
    #[error("post-selection success probability {p_success} is below 1e-12")]
    EmptySelection { p_success: f64 },
}

impl Error {
    pub(crate) fn domain(param: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            param,
            value,
            expected,
        }
    }

    pub(crate) fn numerical(context: &'static str, value: f64) -> Self {
        Error::Numerical { context, value }
    }
}
