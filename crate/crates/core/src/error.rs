use alloc::string::String;

/// Everything that can go wrong while building or running a feasibility problem.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vector must have at least one coordinate")]
    EmptyVector,
    #[error("non-finite coordinate at position {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {0} out of pool")]
    IndexOutOfPool(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("relaxation outside (0,2]: {0}")]
    RelaxationOutOfRange(f64),
    #[error("inconsistent constraint: positive value with zero subgradient")]
    InconsistentConstraint,
    #[error("maximal control requires finite pool")]
    MaximalControlInfinitePool,
    #[error("remotest-set control requires an exact distance for constraint {0}")]
    NoExactDistance(usize),
    #[error("feasibility window must be supplied for an infinite pool")]
    WindowRequired,
    #[error("starting point is not in Q")]
    StartOutsideOuter,
    #[error("phi value {value} outside the declared bounds [{lower}, {upper}]")]
    PhiOutOfBounds { value: f64, lower: f64, upper: f64 },
    #[error("inequality hypothesis violated: {0}")]
    HypothesisViolated(&'static str),
    #[error("Slater point invalid: sup f_i(z) = {0} is not negative")]
    SlaterPointInvalid(f64),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("iterate became non-finite at step {0}")]
    Diverged(usize),
}
