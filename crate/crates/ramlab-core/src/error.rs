//! The single error type shared by every module of the crate.

use alloc::string::String;

/// Errors raised by field construction, arithmetic and the algorithms built
/// on top of it. Variants carry a short human-readable diagnostic where the
/// cause is not evident from the variant alone.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("polynomial is not Eisenstein: {0}")]
    NonEisenstein(String),
    #[error("unramified step is reducible modulo p")]
    ReducibleUnramifiedStep,
    #[error("precision too small: {0}")]
    PrecisionTooSmall(String),
    #[error("precision too large for the modular backend: {0}")]
    PrecisionTooLarge(String),
    #[error("element is not invertible at the working precision")]
    NotInvertibleAtPrecision,
    #[error("element has negative valuation")]
    NegativeValuation,
    #[error("malformed field description: {0}")]
    InvalidSpec(String),
    #[error("no weight supplied for variable `{0}`")]
    MissingWeight(String),
    #[error("truncation order {0} exceeds the configured limit")]
    TruncationOverflow(u32),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("zero polynomial has no Newton polygon")]
    ZeroPolynomial,
    #[error("residual polynomial is inseparable: {0}")]
    InseparableResidual(String),
    #[error("polynomial does not split in the given field")]
    DoesNotSplit,
    #[error("extension is not Galois at the working precision")]
    NotGalois,
    #[error("inconsistent fixed-space dimensions: {0}")]
    InconsistentDims(String),
    #[error("basis reduction failed: {0}")]
    BasisReductionFailure(String),
    #[error("presentation is not admissible (error gauge {0} < 1)")]
    NotAdmissible(String),
    #[error("unsupported relation shape: {0}")]
    UnsupportedRelationShape(String),
    #[error("Jacobian is singular at the probed locus")]
    JacobianSingular,
    #[error("spectral iteration did not converge: {0}")]
    NotConverged(String),
    #[error("no radius threshold in the searched range")]
    NoThresholdInRange,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("fields do not match: {0}")]
    FieldMismatch(String),
    #[error("unsupported element: {0}")]
    Unsupported(String),
    #[error("unknown lemma `{0}`")]
    UnknownLemma(String),
}

pub type Result<T> = core::result::Result<T, Error>;
