//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension {0} is not 2^n with 1 <= n <= 6")]
    InvalidDimension(usize),
    #[error("qubit count {0} out of range 1..=6")]
    QubitCount(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("operator is not traceless (normalized trace {trace:e})")]
    NotTraceless { trace: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("weight {weight} out of range 1..={n}")]
    WeightOutOfRange { weight: usize, n: usize },
    #[error("metric {kind} is not applicable to {n} qubit(s)")]
    MetricMismatch { kind: String, n: usize },
    #[error("control channel {channel} is not aligned with a single Pauli direction")]
    NotPauliAligned { channel: usize },
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("channel index {channel} out of range (have {channels})")]
    ChannelOutOfRange { channel: usize, channels: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input")]
    EmptyInput,
    #[error("unitarity drift {deviation:e} exceeds tolerance at step {step}")]
    UnitarityDrift { step: usize, deviation: f64 },
    #[error("bound precondition violated: {0}")]
    BoundPrecondition(String),
    #[error("objective is not finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
