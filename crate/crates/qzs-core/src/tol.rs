//! Numerical tolerances shared across the crate.
//!
//! Every cutoff that decides feasibility, convergence, or rejection lives
//! here so the values stay consistent between construction-time validation
//! and the checks run by the verification suite.

/// Relative asymmetry allowed when building a Hermitian matrix from raw
/// entries; inputs further from self-adjoint than this are rejected,
/// closer ones are symmetrized.
pub const HERM_SYMMETRY_REL: f64 = 1e-10;

/// Relative residual allowed for an eigendecomposition reconstruction
/// `V diag(lambda) V^dagger`.
pub const EIG_RECONSTRUCTION_REL: f64 = 1e-9;

/// Relative off-diagonal mass at which the cyclic Jacobi sweep stops.
pub const EIG_OFFDIAG_REL: f64 = 1e-14;

/// Cap on Jacobi sweeps before the eigensolver reports failure.
pub const EIG_MAX_SWEEPS: usize = 64;

/// Eigenvalue slack below zero tolerated by density-matrix validation.
pub const PSD_SLACK: f64 = 1e-9;

/// Deviation from unit trace tolerated by density-matrix validation.
pub const TRACE_SLACK: f64 = 1e-9;

/// Frobenius deviation from the identity tolerated when checking that
/// measurement elements sum to the identity.
pub const POVM_COMPLETENESS: f64 = 1e-9;

/// Utilities attached to measurement outcomes must sit in [-1, 1] with
/// this much slack.
pub const UTILITY_RANGE_SLACK: f64 = 1e-12;

/// How far below zero a duality gap may dip before it is treated as a
/// numerical fault rather than roundoff.
pub const GAP_NONNEG_SLACK: f64 = 1e-9;

/// Relative change of the singular-value estimate at which power
/// iteration is considered converged.
pub const OPNORM_REL: f64 = 1e-10;

/// Consecutive converged estimates required before power iteration stops.
pub const OPNORM_STREAK: usize = 5;

/// Total matrix-vector applications allowed across all power-iteration
/// restarts.
pub const OPNORM_MAX_ITERS: usize = 10_000;

/// Largest matrix side length allowed for Kronecker products and other
/// joint-space constructions.
pub const DIM_CAP: usize = 4096;

/// Gap values at or below this are treated as floor-limited noise and
/// excluded from rate fitting.
pub const RATE_GAP_FLOOR: f64 = 1e-14;

/// Minimum number of trace records a rate fit needs.
pub const RATE_MIN_RECORDS: usize = 20;

/// Distances below this make a gap-to-distance ratio meaningless.
pub const DISTANCE_DEGENERATE: f64 = 1e-8;

/// If every sampled gap sits at or below this, the instance is treated as
/// zero-gap and condition estimation is refused.
pub const ZERO_GAP: f64 = 1e-12;

/// Minimum iterate count required to estimate a condition measure.
pub const CONDITION_MIN_SAMPLES: usize = 100;

/// Movement threshold at which alternating projection onto an equilibrium
/// proxy set stops early.
pub const PROXY_MOVEMENT: f64 = 1e-10;

/// Maximum alternating-projection rounds for the equilibrium proxy.
pub const PROXY_MAX_ROUNDS: usize = 50;

/// Smallest eigenvalue the weight matrices of a semidefinite instance may
/// have and still count as strictly positive.
pub const SDP_MIN_EIG: f64 = 1e-9;

/// Weight matrices with condition number above this are rejected as
/// near-singular before normalization.
pub const SDP_MAX_CONDITION: f64 = 1e12;

/// Slack for the strict-positivity check of the normalized map on the
/// identity.
pub const SDP_MAP_POSITIVITY: f64 = 1e-9;

/// Slack for the positivity spot-check of the map on sampled densities.
pub const SDP_MAP_SAMPLE: f64 = 1e-8;

/// Number of sampled densities in the positivity spot-check.
pub const SDP_SPOT_SAMPLES: usize = 50;
