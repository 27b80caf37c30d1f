use thiserror::Error;

use crate::exact::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is identically singular")]
    SingularMatrix,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported: scalar field ({0})")]
    UnsupportedScalarField(String),

    #[error("unsupported: non-generic leading matrix ({0})")]
    NonGenericLeading(String),

    #[error("point {0} is not a singular point")]
    NotSingular(Box<Point>),

    #[error("point {0} is not a pole of any coefficient")]
    NotAPole(Box<Point>),

    #[error("undecided at order {0}")]
    Undecided(usize),

    #[error("truncation {upto} is below the valuation {valuation}")]
    TruncationBelowValuation { upto: i64, valuation: i64 },

    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),

    #[error("inadmissible matrix: {0}")]
    Inadmissible(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cyclic vector search exhausted after {} candidates: {}", tried.len(), tried.join("; "))]
    CyclicSearchExhausted { tried: Vec<String> },

    #[error("iteration cap {cap} exceeded after {steps} steps (partial gauge retained)")]
    IterationCap { cap: usize, steps: usize },

    #[error("step size underflow near z = {0}")]
    StepUnderflow(String),

    #[error("path passes within {distance:e} of a singular point (safety radius {radius:e})")]
    SafetyRadius { distance: f64, radius: f64 },

    #[error("apparent-point certification failed at {0}")]
    CertificationFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable tag used in diagnostics and findings.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularMatrix => "singular_matrix",
            Error::Dimension(_) => "dimension",
            Error::UnsupportedScalarField(_) => "unsupported_scalar_field",
            Error::NonGenericLeading(_) => "non_generic_leading_matrix",
            Error::NotSingular(_) => "not_singular",
            Error::NotAPole(_) => "not_a_pole",
            Error::Undecided(_) => "undecided",
            Error::TruncationBelowValuation { .. } => "truncation_below_valuation",
            Error::PartitionMismatch(_) => "partition_mismatch",
            Error::Inadmissible(_) => "inadmissible",
            Error::Precondition(_) => "precondition",
            Error::CyclicSearchExhausted { .. } => "cyclic_search_exhausted",
            Error::IterationCap { .. } => "iteration_cap",
            Error::StepUnderflow(_) => "step_underflow",
            Error::SafetyRadius { .. } => "safety_radius",
            Error::CertificationFailed(_) => "certification_failed",
            Error::Parse(_) => "parse",
            Error::Internal(_) => "internal",
        }
    }
}
