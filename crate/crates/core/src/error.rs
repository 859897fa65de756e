use thiserror::Error;

/// Errors raised by the library.
///
/// Variants split into input validation problems ([`Error::OutOfRange`],
/// [`Error::Precondition`], [`Error::DispersionUndefined`]) and numerical
/// failures ([`Error::UnderResolved`], [`Error::Convergence`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value:e} is out of range ({bound})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        bound: String,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dispersion relation undefined at omega = {0:e} rad/s")]
    DispersionUndefined(f64),
    #[error("grid under-resolved: {0}")]
    UnderResolved(String),
    #[error("numerical convergence failure: {0}")]
    Convergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::OutOfRange { .. } | Error::Precondition(_) | Error::DispersionUndefined(_)
        )
    }

    /// True for under-resolution and convergence failures.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::UnderResolved(_) | Error::Convergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            bound: "must be finite".into(),
        })
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            bound: "must be finite and > 0".into(),
        })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            bound: "must be finite and >= 0".into(),
        })
    }
}
