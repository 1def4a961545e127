use thiserror::Error;

pub type Result<T, E = GreyError> = std::result::Result<T, E>;

/// Broad category of an error, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input data violates a series invariant.
    Data,
    /// A parameter or configuration value is out of its domain.
    Config,
    /// A numerical procedure failed on otherwise valid input.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreyError {
    #[error("series has {len} values, at least {min} are required")]
    TooShort { len: usize, min: usize },

    #[error("{labels} labels but {values} values")]
    LengthMismatch { labels: usize, values: usize },

    #[error("value {value} at position {index} is not strictly positive")]
    NonPositive { index: usize, value: f64 },

    #[error("value at position {index} is not finite")]
    NonFinite { index: usize },

    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("least-squares estimation failed for n = {n}, P = {p}: {reason}")]
    EstimationFailure { n: f64, p: f64, reason: String },

    #[error("time response undefined at k = {k}: bracket {bracket} is not positive")]
    ResponseDomain { k: i64, bracket: f64 },

    #[error("time response overflows at k = {k}")]
    ResponseOverflow { k: i64 },

    #[error("formula inapplicable: {0}")]
    FormulaInapplicable(String),

    #[error("no feasible (P, n) candidate on the search lattice")]
    OptimizationFailure,

    #[error("initial-condition correction infeasible: corrected power {0} is not positive")]
    CorrectionInfeasible(f64),

    #[error("rolling step {step} failed: {source}")]
    RollingFailure {
        step: usize,
        #[source]
        source: Box<GreyError>,
    },

    #[error("metric input invalid: {0}")]
    MetricInput(String),

    #[error("actual series has zero variance, posterior ratio undefined")]
    ZeroVariance,
}

impl GreyError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            GreyError::TooShort { .. }
            | GreyError::LengthMismatch { .. }
            | GreyError::NonPositive { .. }
            | GreyError::NonFinite { .. }
            | GreyError::MetricInput(_)
            | GreyError::ZeroVariance => ErrorKind::Data,
            GreyError::ParameterDomain(_) => ErrorKind::Config,
            GreyError::RollingFailure { source, .. } => match source.kind() {
                ErrorKind::Config => ErrorKind::Config,
                _ => ErrorKind::Numerical,
            },
            _ => ErrorKind::Numerical,
        }
    }
}
