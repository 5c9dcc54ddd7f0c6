use alloc::string::String;

use crate::params::Scheme;
use crate::sweep::PeakFit;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid value for {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step {dt} us does not divide the switching interval {interval} us")]
    MisalignedStep { dt: f64, interval: f64 },

    #[error("{operation} does not support the {scheme} scheme")]
    UnsupportedScheme { operation: &'static str, scheme: Scheme },

    #[error("eigensolver did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("J_{order}({x}) is outside the supported range |n| <= 60, |x| <= 50")]
    BesselOutOfRange { order: i64, x: f64 },

    #[error("Lorentzian fit did not converge after {iterations} iterations")]
    FitNoConvergence { iterations: usize, best: PeakFit },

    #[error("grid axes differ")]
    AxisMismatch,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
