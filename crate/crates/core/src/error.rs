use crate::measure::BallMeasureEnclosure;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("a recurrent system needs at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("row {row} has {found} entries, expected {expected}")]
    NotSquare { row: usize, expected: usize, found: usize },
    #[error("entry ({row}, {col}) is negative or not finite: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to 1 {deviation:+e}")]
    RowSumNotOne { row: usize, deviation: f64 },
    #[error("transition matrix is not irreducible")]
    NotIrreducible,
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("power iteration and linear solve disagree by {0:e}")]
    SolverDisagreement(f64),
    #[error("map {map} is not contractive: bounds ({lower}, {upper})")]
    NotContractive { map: usize, lower: f64, upper: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("map {0} does not send the ambient box into itself")]
    MapLeavesAmbient(usize),
    #[error("map {0} violates its declared distortion bounds")]
    DistortionViolated(usize),
    #[error("box is empty or has no interior")]
    InvalidBox,
    #[error("word is not admissible for the transition matrix")]
    InadmissibleWord,
    #[error("letter {letter} is out of range for {states} states")]
    LetterOutOfRange { letter: usize, states: usize },
    #[error("words must have length at least 2")]
    WordTooShort,
    #[error("attractor depth must be at least 1")]
    DepthZero,
    #[error("expected {expected} items, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("epsilon {eps} must lie in (0, {upper})")]
    EpsilonOutOfRange { eps: f64, upper: f64 },
    #[error("word length cap {0} exceeded while building an antichain")]
    DepthCapExceeded(usize),
    #[error("a seed is required for stochastic operations")]
    SeedRequired,
    #[error("trajectory has {len} steps, need at least {min}")]
    TrajectoryTooShort { len: usize, min: usize },
    #[error("depth cap reached; partial enclosure [{}, {}]", .0.lo, .0.hi)]
    DepthCapReached(BallMeasureEnclosure),
    #[error("no Frostman bound available for the tail estimate")]
    NoFrostmanConstant,
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("budget {budget} is smaller than the coarsest antichain ({needed} words)")]
    BudgetTooSmall { budget: usize, needed: usize },
    #[error("operation needs a one-dimensional system, got dimension {0}")]
    NotOneDimensional(usize),
    #[error("quantization curve not strictly decreasing at n = {0}")]
    MonotonicityFailure(usize),
    #[error("curve has {0} entries, need at least 4")]
    CurveTooShort(usize),
    #[error("only {0} radii were resolved, need at least 4")]
    InsufficientResolvedRadii(usize),
    #[error("strong separation condition is not certified")]
    SscNotCertified,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
