use thiserror::Error;

/// Crate-wide error type.
///
/// Precision problems are always surfaced as errors, never silently absorbed:
/// an operation that cannot distinguish its result from zero at the working
/// precision returns [`Error::PrecisionLoss`] rather than guessing.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("field spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("total precision loss: result indistinguishable from zero at precision {digits} digits")]
    PrecisionLoss { digits: usize },
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("square root of element with odd valuation")]
    OddValuationSqrt,
    #[error("square root of a nonresidue leading digit")]
    NonResidueSqrt,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("sort error: {0}")]
    Sort(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unstable result: {0}")]
    Unstable(String),
    #[error("refine-or-fail: {0}")]
    RefineNeeded(String),
    #[error("linear system inconsistent: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
