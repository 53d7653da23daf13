use alloc::string::String;
use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric: entries ({row},{col}) and ({col},{row}) differ")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue}")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("quadruple violates zero momentum: n1 - n2 + n3 = {got}, outgoing {expected}")]
    ZeroMomentumViolated { expected: String, got: String },
    #[error("interior cluster violates dyadicity (max |n| = {max_norm}, min |n| = {min_norm}): {members}")]
    DyadicityViolated { min_norm: f64, max_norm: f64, members: String },
    #[error("mode {0} is not covered by the partition")]
    ModeNotCovered(String),
    #[error("resonant set has {0} non-trivial members; the identity needs a trivial set")]
    NonTrivialResonantSet(usize),
    #[error("resonance value {0} is too small to divide by")]
    ZeroDivisor(f64),
    #[error("triple lies in a quasi-resonant set of the outgoing mode")]
    QuasiResonantTriple,
    #[error("time {0} is outside the domain t >= 1")]
    TimeBeforeOne(f64),
    #[error("step rejected at t = {time}: relative mass drift {drift} exceeds {guard}")]
    StepRejected { time: f64, drift: f64, guard: f64 },
    #[error("field has the wrong representation: expected {expected}")]
    WrongRepresentation { expected: &'static str },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("solution blew up at t = {time}: sup |U| = {sup}")]
    BlowUp { time: f64, sup: f64 },
    #[error("window too small: relative amplitude {amplitude} at the edge")]
    WindowTooSmall { amplitude: f64 },
    #[error("matrices of the partition and the request differ")]
    MatrixMismatch,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
