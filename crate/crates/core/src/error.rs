use thiserror::Error;

use crate::interval::IntegerInterval;

/// Errors raised by the operators and checkers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty interval: lo {lo} exceeds hi {hi}")]
    EmptyInterval { lo: i64, hi: i64 },

    #[error("coordinate {0} lies outside the supported range ±2^48")]
    CoordinateRange(i128),

    #[error("dyadic level {0} outside 1..=52 or index out of range")]
    InvalidLevel(u32),

    #[error("expansion factor must be a positive integer")]
    InvalidExpansion,

    #[error("a windowed sequence needs at least one stored value")]
    EmptySequence,

    #[error("value at index {index} is not a finite real")]
    NonFinite { index: i64 },

    #[error("truncation J = {0} admits no radius or interval")]
    InvalidTruncation(u64),

    #[error("evaluation window {eval} is not contained in the computation range {range}")]
    EvalOutsideRange {
        eval: IntegerInterval,
        range: IntegerInterval,
    },

    #[error("weight entry at {index} is not strictly positive")]
    NonPositiveWeight { index: i64 },

    #[error("exponent p = {0} must satisfy p >= 1")]
    InvalidExponent(f64),

    #[error("exponent {0} has no exact rational evaluation")]
    InexactExponent(f64),

    #[error("{what} {inner} escapes the weight window {window}")]
    EscapesWindow {
        what: &'static str,
        inner: IntegerInterval,
        window: IntegerInterval,
    },

    #[error("point {point} lies outside {window}")]
    PointOutside { point: i64, window: IntegerInterval },

    #[error("the sequence vanishes on {0}")]
    VanishesOn(IntegerInterval),

    #[error("the set must be non-empty")]
    EmptySet,

    #[error("height must be strictly positive")]
    NonPositiveHeight,

    #[error("dyadic level {0} is not quiet: some interval there averages above the height")]
    NotQuiet(u32),

    #[error("superlevel set at this height is not finitely bounded")]
    UnboundedSuperlevel,

    #[error("operator output on {have} does not contain the decay window {need}")]
    WindowTooSmall {
        have: IntegerInterval,
        need: IntegerInterval,
    },

    #[error("the sharp maximal operator has no decay bound for superlevel sets")]
    NoDecayBound,

    #[error("the sequence has zero norm")]
    ZeroNorm,

    #[error("{what}: expected {expected} entries, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("perm entry for atom {atom} is out of range or repeated")]
    NotPermutation { atom: usize },

    #[error("atom {atom} has negative mass")]
    NegativeMass { atom: usize },

    #[error("mass is not preserved: atom {atom} and its image differ")]
    MassNotPreserved { atom: usize },

    #[error("masses sum to {0}, not 1")]
    MassSum(f64),

    #[error("weight at atom {atom} is not strictly positive")]
    NonPositiveAtomWeight { atom: usize },

    #[error("atom {atom} does not exist in a system of {n} atoms")]
    NoSuchAtom { atom: usize, n: usize },

    #[error("the system is not ergodic")]
    NotErgodic,

    #[error("no rectangle of length {length} exists in a cycle of length {cycle}")]
    RectangleTooLong { length: u64, cycle: usize },

    #[error("rectangle half-length K = {0} must be an even positive integer here")]
    OddRectangle(u64),

    #[error("atoms do not form the base of a rectangle of length {length}")]
    NotBase { length: u64 },

    #[error("the set has zero measure")]
    NullSet,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
