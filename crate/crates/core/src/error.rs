use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite phase value {0}")]
    NonFinite(f64),

    #[error("empty phase list")]
    Empty,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not unitary: defect {defect:e} exceeds {tol:e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("malformed value: {0}")]
    Malformed(String),

    #[error("invalid clustered model: {0}")]
    InvalidModel(String),

    #[error("phase sum {sum:e} is not zero")]
    NonZeroSum { sum: f64 },

    #[error("input is projectively scalar")]
    Scalar,

    #[error("angle normalization infeasible at dimension {dim}: prefix bound {achieved} exceeds {allowed}")]
    NormalizationInfeasible {
        dim: usize,
        achieved: f64,
        allowed: f64,
        suggested_dim: Option<usize>,
    },

    #[error("SU(2) solve out of range: |phi| = {phi} exceeds {limit} (theta = {theta})")]
    Su2Range { theta: f64, phi: f64, limit: f64 },

    #[error("chain length {0} must be a positive even integer")]
    OddChain(usize),

    #[error("not an SU(2) element: {0}")]
    NotSu2(String),

    #[error("block position {position} out of range for dimension {dim}")]
    BlockOutOfRange { position: usize, dim: usize },

    #[error("block positions {first} and {second} are closer than 2")]
    BlockSpacing { first: usize, second: usize },

    #[error("largest available chord {max_chord} is below the required gap {required}")]
    GapInfeasible { max_chord: f64, required: f64 },

    #[error("dimension {dim} too small: {needed} blocks needed, {available} available (suggested dimension: {suggested_dim:?})")]
    DimensionTooSmall {
        dim: usize,
        needed: usize,
        available: usize,
        suggested_dim: Option<usize>,
    },

    #[error("block {block}: |angle| = {lhs} exceeds m * chord = {rhs}")]
    GapCondition { block: usize, lhs: f64, rhs: f64 },

    #[error("ell(u) = {ell_u} exceeds m * ell_ess(v) = {bound} (m = {m}, ell_ess(v) = {ell_v})")]
    LengthBound {
        ell_u: f64,
        ell_v: f64,
        m: usize,
        bound: f64,
    },

    #[error("no block schedule fits the budget of {budget} factors at dimension {dim} (cheapest found: {cost:?})")]
    ScheduleInfeasible {
        dim: usize,
        cost: Option<usize>,
        budget: usize,
    },

    #[error("eigenphase {phase} has multiplicity {multiplicity}, at least 2 is required")]
    Multiplicity { phase: f64, multiplicity: usize },

    #[error("central element: a non-scalar input is required")]
    Central,

    #[error("base has zero length")]
    ZeroLength,

    #[error("eigendecomposition residual {residual:e} exceeds {tol:e}")]
    Decomposition { residual: f64, tol: f64 },

    #[error("internal verification failed: {0}")]
    Internal(String),
}

impl Error {
    /// True for failures of a construction that should have succeeded.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_) | Error::Decomposition { .. })
    }
}
