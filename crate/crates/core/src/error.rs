use crate::expr::{EvalError, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("evaluation failed at point {point:?}: {source}")]
    EvalAt { point: Vec<f64>, source: EvalError },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("metric is singular or not positive definite at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("sampling exhausted: {accepted} admissible points after {draws} draws")]
    SamplingExhausted { accepted: usize, draws: usize },
    #[error("degenerate plane at {point:?}")]
    DegeneratePlane { point: Vec<f64> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for errors caused by bad input or unmet preconditions, as
    /// opposed to a numerical failure of a verified quantity.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::EvalAt { .. } | Error::SingularMetric { .. } | Error::DegeneratePlane { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
