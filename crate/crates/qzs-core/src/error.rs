//! Error type shared by every fallible operation in the crate.

use core::fmt;

/// Why an operation could not produce a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands (or an operand and a game) disagree on dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// A dimension does not factor as the requested tensor product.
    BadFactorization { dim: usize, dim_a: usize, dim_b: usize },
    /// A product dimension would exceed the configured cap.
    DimensionCap { requested: usize, cap: usize },
    /// An input vector or list was empty where data is required.
    EmptyInput,
    /// A dimension that must be a power of two is not.
    NotPowerOfTwo { value: usize },
    /// A NaN or infinity appeared in an input or intermediate value.
    NonFinite,
    /// Raw entries are too far from self-adjoint to symmetrize.
    NotHermitian { asymmetry: f64 },
    /// The Jacobi eigensolver failed to drive the off-diagonal mass down.
    EigDidNotConverge { offdiag: f64 },
    /// A matrix meant to be positive semidefinite has a negative eigenvalue.
    NotPositive { min_eigenvalue: f64 },
    /// A matrix meant to be a state does not have unit trace.
    TraceNotOne { trace: f64 },
    /// Measurement elements do not sum to the identity.
    IncompleteMeasurement { deviation: f64 },
    /// An outcome utility falls outside [-1, 1].
    UtilityOutOfRange { value: f64 },
    /// A scalar parameter that must be positive is not.
    NonPositiveParameter { name: &'static str, value: f64 },
    /// A scalar parameter fell outside its documented range.
    ParameterOutOfRange { name: &'static str, value: f64 },
    /// A step size exceeds the stability limit for the instance.
    StepSizeTooLarge { eta: f64, limit: f64 },
    /// Fewer data points than the operation needs.
    InsufficientData { needed: usize, found: usize },
    /// Two states are too close for a gap-to-distance ratio.
    DegenerateDistance { distance: f64 },
    /// Every sampled iterate has (numerically) zero gap.
    ZeroGapInstance { max_gap: f64 },
    /// A weight matrix is too ill-conditioned to normalize.
    IllConditioned { condition: f64 },
    /// The requested accuracy is too coarse for the instance value.
    AccuracyTooCoarse { xi: f64 },
    /// The solver exhausted its budget above the target gap.
    DidNotConverge { gap: f64, target: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::BadFactorization { dim, dim_a, dim_b } => {
                write!(f, "dimension {dim} does not factor as {dim_a} x {dim_b}")
            }
            Error::DimensionCap { requested, cap } => {
                write!(f, "dimension {requested} exceeds cap {cap}")
            }
            Error::EmptyInput => write!(f, "empty input"),
            Error::NotPowerOfTwo { value } => {
                write!(f, "dimension {value} is not a power of two")
            }
            Error::NonFinite => write!(f, "non-finite value encountered"),
            Error::NotHermitian { asymmetry } => {
                write!(f, "matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")
            }
            Error::EigDidNotConverge { offdiag } => {
                write!(f, "eigensolver stalled with off-diagonal mass {offdiag:.3e}")
            }
            Error::NotPositive { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (lambda_min {min_eigenvalue:.3e})")
            }
            Error::TraceNotOne { trace } => write!(f, "trace is {trace:.12}, expected 1"),
            Error::IncompleteMeasurement { deviation } => {
                write!(f, "measurement elements sum to identity only within {deviation:.3e}")
            }
            Error::UtilityOutOfRange { value } => {
                write!(f, "utility {value} outside [-1, 1]")
            }
            Error::NonPositiveParameter { name, value } => {
                write!(f, "parameter {name} must be positive, got {value}")
            }
            Error::ParameterOutOfRange { name, value } => {
                write!(f, "parameter {name} out of range: {value}")
            }
            Error::StepSizeTooLarge { eta, limit } => {
                write!(f, "step size {eta} exceeds stability limit {limit}")
            }
            Error::InsufficientData { needed, found } => {
                write!(f, "need at least {needed} data points, found {found}")
            }
            Error::DegenerateDistance { distance } => {
                write!(f, "distance {distance:.3e} too small for a ratio")
            }
            Error::ZeroGapInstance { max_gap } => {
                write!(f, "all sampled gaps at most {max_gap:.3e}; instance has no gap signal")
            }
            Error::IllConditioned { condition } => {
                write!(f, "condition number {condition:.3e} too large to normalize")
            }
            Error::AccuracyTooCoarse { xi } => {
                write!(f, "relative accuracy {xi} is not below 1; tighten epsilon")
            }
            Error::DidNotConverge { gap, target } => {
                write!(f, "solver stopped at gap {gap:.3e}, above the target {target:.3e}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
