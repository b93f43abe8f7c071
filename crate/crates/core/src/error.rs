use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("factor dimensions must be positive")]
    InvalidDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown entity label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate entity label `{0}`")]
    DuplicateLabel(String),
    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("basis for entity `{entity}` is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { entity: String, deviation: f64 },
    #[error("outcome cannot occur (probability {0:e})")]
    ZeroProbabilityOutcome(f64),
    #[error("entity `{0}` has already been measured")]
    AlreadyMeasured(String),
    #[error("measurement order is not a permutation of the entity labels")]
    InvalidOrder,
    #[error("no measurement basis given for entity `{0}`")]
    MissingBasis(String),
    #[error("distributions are defined over different outcome tuples")]
    KeySetMismatch,
    #[error("singular value decomposition did not converge")]
    SvdFailed,
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error("hidden parameter {0} lies outside [0, 1)")]
    InvalidLambda(f64),
}

impl Error {
    /// Stable machine-readable identifier for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDimension => "InvalidDimension",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnknownLabel(_) => "UnknownLabel",
            Error::DuplicateLabel(_) => "DuplicateLabel",
            Error::NotNormalized(_) => "NotNormalized",
            Error::InvalidDensityMatrix(_) => "InvalidDensityMatrix",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::ZeroProbabilityOutcome(_) => "ZeroProbabilityOutcome",
            Error::AlreadyMeasured(_) => "AlreadyMeasured",
            Error::InvalidOrder => "InvalidOrder",
            Error::MissingBasis(_) => "MissingBasis",
            Error::KeySetMismatch => "KeySetMismatch",
            Error::SvdFailed => "SvdFailed",
            Error::EmptySample => "EmptySample",
            Error::InvalidLambda(_) => "InvalidLambda",
        }
    }
}
