use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative probability mass {value} at ({row}, {col})")]
    NegativeMass { row: usize, col: usize, value: f64 },
    #[error("probability mass sums to {sum}, expected 1")]
    MassNotOne { sum: f64 },
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("value {0} outside the domain [0, 1]")]
    DomainError(f64),
    #[error("joint distribution has no positive-mass symbols")]
    DegenerateJoint,
    #[error("conditional mass P(y={y}|x={x}) is below the interval resolution")]
    Resolution { x: usize, y: usize },
    #[error("leakage {eps} outside [0, {max}]")]
    EpsOutOfRange { eps: f64, max: f64 },
    #[error("H(X) = 0 but positive leakage {0} was requested")]
    DegenerateX(f64),
    #[error("pair (x={x}, y={y}) has zero probability")]
    ZeroMassPair { x: usize, y: usize },
    #[error("pmf has no positive-mass symbol")]
    EmptySupport,
    #[error("symbol {0} is not in the code's support")]
    UnknownSymbol(usize),
    #[error("bit stream ends inside a codeword")]
    TruncatedStream,
    #[error("index {index} out of range for modulus {modulus}")]
    IndexOutOfRange { index: usize, modulus: usize },
    #[error("leakage budget {eps} is below the required {required}")]
    ThresholdNotMet { eps: f64, required: f64 },
    #[error("bad separation: {0}")]
    BadSeparation(String),
    #[error("X2 is not a deterministic function of X1")]
    NotFunctional,
    #[error("key {key} out of range for key size {key_size}")]
    KeyOutOfRange { key: usize, key_size: usize },
    #[error("malformed codeword: {0}")]
    MalformedCodeword(String),
    #[error("enumeration needs {needed} atoms, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("no separation satisfies the entropy threshold")]
    EmptyFeasibleSet,
    #[error("parse error: {0}")]
    ParseError(String),
}
