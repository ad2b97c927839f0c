use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input: bad ids, non-positive lengths, points off the graph, unparsable text.
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("non-integer slope {slope} on edge {edge}")]
    NonIntegerSlope { edge: String, slope: String },
    #[error("divisor has nonzero degree {0}")]
    NonZeroDegree(i64),
    #[error("divisor is not principal")]
    NotPrincipal,
    #[error("model is not simple and loopless: {0}")]
    ModelNotSimple(String),
    #[error("edge {0} does not have unit length")]
    NonUnitLengths(String),
    #[error("functions are defined on different graphs")]
    GraphMismatch,
    #[error("embedding certification failed: {0}")]
    CertificationFailure(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl Error {
    /// Stable machine-readable name used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "InvalidInput",
            Error::Disconnected => "Disconnected",
            Error::NonIntegerSlope { .. } => "NonIntegerSlope",
            Error::NonZeroDegree(_) => "NonZeroDegree",
            Error::NotPrincipal => "NotPrincipal",
            Error::ModelNotSimple(_) => "ModelNotSimple",
            Error::NonUnitLengths(_) => "NonUnitLengths",
            Error::GraphMismatch => "GraphMismatch",
            Error::CertificationFailure(_) => "CertificationFailure",
            Error::InternalInconsistency(_) => "InternalInconsistency",
        }
    }
}
