use thiserror::Error;

use crate::fracsolve::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("accuracy budget exceeded: {message} (achieved {achieved:e})")]
    Accuracy { message: String, achieved: f64 },
    #[error("truncation: {message} (last reliable time {last_reliable:?})")]
    Truncation {
        message: String,
        last_reliable: Option<f64>,
    },
    #[error("precondition violated at factor {factor}: {message}")]
    Precondition { factor: usize, message: String },
    #[error("divergent solve at factor {factor}")]
    Divergent {
        factor: usize,
        report: Box<SolveReport>,
    },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("degenerate gap: {0}")]
    DegenerateGap(String),
    #[error("ordering error: {0}")]
    Ordering(String),
    #[error("fit error: {0}")]
    Fit(String),
}

impl Error {
    /// True for failures caused by a numerical budget (grid resolution, truncation,
    /// quadrature accuracy, divergence) rather than invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Capacity(_)
                | Error::Resolution(_)
                | Error::Accuracy { .. }
                | Error::Truncation { .. }
                | Error::Divergent { .. }
                | Error::Fit(_)
        )
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
