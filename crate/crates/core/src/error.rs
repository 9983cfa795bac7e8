use thiserror::Error;

/// Every failure carries the name of the condition that triggered it, so
/// reports and exit codes can be traced back without parsing messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("PoleError: {0}")]
    Pole(String),
    #[error("NonConvergence: {0}")]
    NonConvergence(String),
    #[error("DivergentSeries: {0}")]
    DivergentSeries(String),
    #[error("SizeError: {0}")]
    Size(String),
    #[error("SingularCoefficient: |q({m:?})| = {q_abs:e} below guard")]
    SingularCoefficient { m: Vec<usize>, q_abs: f64 },
    #[error("TailNotConverged: tail bound {tail:e} exceeds target {target:e} at order {order}")]
    TailNotConverged { tail: f64, target: f64, order: usize },
    #[error("CatastrophicCancellation: cancellation ratio {ratio:e} leaves estimated error {error:e}")]
    CatastrophicCancellation { ratio: f64, error: f64 },
    #[error("InvalidContour: {0}")]
    InvalidContour(String),
    #[error("PoleOnContour: {0}")]
    PoleOnContour(String),
    #[error("InnerEvalError: {0}")]
    InnerEval(Box<Error>),
    #[error("Unsupported: {0}")]
    Unsupported(String),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::Pole(_) => "PoleError",
            Error::NonConvergence(_) => "NonConvergence",
            Error::DivergentSeries(_) => "DivergentSeries",
            Error::Size(_) => "SizeError",
            Error::SingularCoefficient { .. } => "SingularCoefficient",
            Error::TailNotConverged { .. } => "TailNotConverged",
            Error::CatastrophicCancellation { .. } => "CatastrophicCancellation",
            Error::InvalidContour(_) => "InvalidContour",
            Error::PoleOnContour(_) => "PoleOnContour",
            Error::InnerEval(_) => "InnerEvalError",
            Error::Unsupported(_) => "Unsupported",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// Usage-type failures, as opposed to numerical ones.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Size(_) | Error::InvalidInput(_) | Error::Unsupported(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
