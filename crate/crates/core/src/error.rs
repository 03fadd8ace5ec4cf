use thiserror::Error;

use crate::ordinal::Ordinal;
use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("undefined subtraction: {subtrahend} exceeds {minuend}")]
    UndefinedSubtraction { minuend: Ordinal, subtrahend: Ordinal },

    #[error("leading power of 0 is undefined")]
    LeadingPowerOfZero,

    #[error("step functions are evaluated at positive points only, got {0}")]
    NonpositivePoint(Rational),

    #[error("step function breakpoints must be positive and strictly increasing")]
    InvalidBreakpoints,

    #[error("expected a non-increasing step function")]
    NotNonIncreasing,

    #[error("epsilon must be positive, got {0}")]
    NonpositiveEpsilon(Rational),

    #[error("oracle search needs {needed} compressions to reach its maximum, depth limit is {limit}")]
    DepthExceeded { needed: usize, limit: usize },

    #[error("point {point} lies outside [1, {top}]")]
    OutOfSpace { point: Ordinal, top: Ordinal },

    #[error("measure has no mass")]
    EmptyMeasure,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("level {level} outside the built range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("index {index} outside the valid range {lo}..={hi}")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("invalid parameters: {0}")]
    ParamInvalid(String),

    #[error("norm bound violated: |i_{{{m},{n}}}| = {norm} > {lambda}")]
    BoundViolation {
        m: usize,
        n: usize,
        norm: Box<Rational>,
        lambda: Box<Rational>,
    },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("branch prefix of length {0} ends before the stopping depth")]
    BranchTooShort(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}
