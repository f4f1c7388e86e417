use thiserror::Error;

/// Errors shared by every layer of the toolkit.
///
/// Operations that merely fail to *decide* something (unstabilized towers,
/// undecided torsion checks) do not error; they report through verdict types.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported scalar kind for this operation: {0}")]
    UnsupportedScalar(String),
    #[error("unsupported ring backend for this operation: {0}")]
    UnsupportedBackend(String),
    #[error("operands live over different rings")]
    RingMismatch,
    #[error("a degree window is required for this backend: {0}")]
    WindowRequired(String),
    #[error("complex shape not supported: {0}")]
    UnsupportedShape(String),
    #[error("stage maps do not commute with tower transitions")]
    NotATowerMap,
    #[error("map is not surjective in degree {0}")]
    NotSurjective(i64),
    #[error("lifts are not comparable: {0}")]
    NotComparable(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("inconsistent construction: {0}")]
    Invalid(String),
    #[error("manifest error at {location}: {message}")]
    Manifest { location: String, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
