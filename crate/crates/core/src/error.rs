//! Shared error type for every computation in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("series is not invertible: leading coefficient is zero")]
    NotInvertible,

    #[error("cannot align exponent offsets {0} and {1}: difference is not an integer")]
    OffsetMismatch(String, String),

    #[error("Eisenstein weight must be a positive even integer, got {0}")]
    InvalidWeight(i64),

    #[error("need truncation order at least {required}, have {have}")]
    NeedMoreOrder { required: usize, have: usize },

    #[error("symmetric-power weight must be positive, got {0}")]
    NonPositiveWeight(i64),

    #[error("class cannot be integrated: {0}")]
    NotACharacteristicClass(String),

    #[error("no pairing supplied for monomial {0}")]
    MissingPairing(String),

    #[error("invalid pairing table entry: {0}")]
    InvalidPairing(String),

    #[error("weighted normal dimension sum {0} is odd: the equivariant parameter would be branched")]
    OddWeightSum(i64),

    #[error("no fixed components supplied")]
    NoFixedPoints,

    #[error("operation requires a manifold with the p1_zero flag set")]
    RequiresP1Zero,

    #[error("state space would need {states} basis states, exceeding the cap of {cap}")]
    CapacityExceeded { states: usize, cap: usize },

    #[error("weight {0} is not a declared mode")]
    UnknownMode(i64),

    #[error("direction {direction} out of range for mode of multiplicity {multiplicity}")]
    DirectionOutOfRange { direction: usize, multiplicity: usize },

    #[error("operator kind {kind} requires {needs}")]
    SpecMismatch { kind: String, needs: String },

    #[error("structure constants must be antisymmetric: {0}")]
    InvalidStructureConstants(String),

    #[error("spectrum is not rational-diagonalizable: {0}")]
    SpectralObstruction(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
