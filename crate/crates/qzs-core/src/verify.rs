//! Empirical sharpness diagnostics.
//!
//! The gap-to-distance ratio along a trajectory witnesses how strongly
//! the gap separates iterates from the solution set. The true nearest
//! optimal point is not computable in general, so distances are taken
//! to a proxy: the projection onto a known diagonal equilibrium's
//! constraint set, or a fixed high-accuracy terminal iterate. Reports
//! carry the proxy kind so a heuristic number is never mistaken for an
//! instance constant.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::herm::{eig, HermitianMatrix, C64};
use crate::solver::ConvergenceTrace;
use crate::spectraplex::{joint_distance, DensityMatrix, JointState};
use crate::tol;

/// Stand-in for the nearest optimal point.
#[derive(Debug, Clone)]
pub enum NashProxy {
    /// Known equilibrium of a diagonal embedding, given as the two
    /// classical mixed strategies. The proxy point for `z` is its
    /// alternating projection onto the densities with these diagonals.
    AnalyticDiagonal { x_star: Vec<f64>, y_star: Vec<f64> },
    /// Fixed reference point, typically the terminal iterate of a
    /// high-accuracy solve.
    TerminalIterate(JointState),
}

/// Which proxy produced a report's distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyKind {
    AnalyticNash,
    TerminalIterateProxy,
}

impl NashProxy {
    pub fn kind(&self) -> ProxyKind {
        match self {
            NashProxy::AnalyticDiagonal { .. } => ProxyKind::AnalyticNash,
            NashProxy::TerminalIterate(_) => ProxyKind::TerminalIterateProxy,
        }
    }
}

/// Gap-to-distance ratios over a sampled trajectory.
#[derive(Debug, Clone)]
pub struct SpmsReport {
    pub instance_id: String,
    /// Iterates that entered the ratios; degenerate-distance points are
    /// skipped, not counted.
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub proxy_kind: ProxyKind,
}

/// Empirical condition measure over one or more solver traces.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    /// Smallest sampled gap-to-distance ratio.
    pub delta_hat: f64,
    /// Field norm divided by `delta_hat`.
    pub kappa_hat: f64,
    pub samples: usize,
    pub proxy_kind: ProxyKind,
}

/// Gap at `z` divided by the distance to the proxy point. The distance
/// must clear the degeneracy floor; on-solution points are excluded by
/// the caller via this error.
pub fn spms_ratio(g: &GameInstance, z: &JointState, z_star_proxy: &JointState) -> Result<f64> {
    let distance = joint_distance(z, z_star_proxy)?;
    if distance <= tol::DISTANCE_DEGENERATE {
        return Err(Error::DegenerateDistance { distance });
    }
    Ok(g.duality_gap(z)? / distance)
}

/// Proxy point for `z`: the alternating projection for the diagonal
/// form, or the fixed reference point.
pub fn proxy_point(proxy: &NashProxy, z: &JointState) -> Result<JointState> {
    match proxy {
        NashProxy::AnalyticDiagonal { x_star, y_star } => {
            let alpha = diagonal_constrained_psd(z.alpha().matrix(), x_star)?;
            let beta = diagonal_constrained_psd(z.beta().matrix(), y_star)?;
            Ok(JointState::new(alpha, beta))
        }
        NashProxy::TerminalIterate(point) => Ok(point.clone()),
    }
}

/// Alternating projection onto unit-trace PSD matrices with the given
/// diagonal: pin the diagonal, clip to the PSD cone, repeat until the
/// round moves less than the movement floor, then pin the diagonal once
/// more so the trace is exact.
fn diagonal_constrained_psd(m: &HermitianMatrix, target: &[f64]) -> Result<DensityMatrix> {
    if target.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: target.len() });
    }
    let total: f64 = target.iter().sum();
    if crate::num::abs(total - 1.0) > tol::TRACE_SLACK {
        return Err(Error::TraceNotOne { trace: total });
    }

    let mut cur = with_diagonal(m, target)?;
    for _ in 0..tol::PROXY_MAX_ROUNDS {
        let pinned = with_diagonal(&cur, target)?;
        let clipped = psd_clip(&pinned)?;
        let moved = clipped.sub(&cur).frob_norm();
        cur = clipped;
        if moved < tol::PROXY_MOVEMENT {
            break;
        }
    }
    DensityMatrix::new(with_diagonal(&cur, target)?)
}

fn with_diagonal(m: &HermitianMatrix, target: &[f64]) -> Result<HermitianMatrix> {
    HermitianMatrix::from_fn(m.dim(), |i, j| {
        if i == j {
            C64::new(target[i], 0.0)
        } else {
            m.entry(i, j)
        }
    })
}

fn psd_clip(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let decomp = eig(m)?;
    let clipped: Vec<f64> = decomp.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    Ok(decomp.recombine(&clipped))
}

/// Ratio scan over an iterate sequence. Points whose proxy distance is
/// at or below the degeneracy floor are skipped.
pub fn spms_scan(
    g: &GameInstance,
    iterates: &[JointState],
    proxy: &NashProxy,
    instance_id: &str,
) -> Result<SpmsReport> {
    let mut samples = 0usize;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for z in iterates {
        let reference = proxy_point(proxy, z)?;
        let ratio = match spms_ratio(g, z, &reference) {
            Ok(ratio) => ratio,
            Err(Error::DegenerateDistance { .. }) => continue,
            Err(other) => return Err(other),
        };
        samples += 1;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    if samples == 0 {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    Ok(SpmsReport {
        instance_id: String::from(instance_id),
        samples,
        min_ratio,
        max_ratio,
        proxy_kind: proxy.kind(),
    })
}

/// Smallest gap-to-distance ratio over all recorded iterates of the
/// given traces, with the induced condition estimate.
///
/// Traces must carry recorded iterates. Degenerate-distance points are
/// skipped; at least 100 usable samples are required, and an instance
/// whose sampled gaps are all below the zero-gap floor is rejected as
/// carrying no signal.
pub fn estimate_condition_measure(
    g: &GameInstance,
    traces: &[ConvergenceTrace],
    proxy: &NashProxy,
) -> Result<ConditionReport> {
    let mut samples = 0usize;
    let mut delta_hat = f64::INFINITY;
    let mut max_gap = 0.0f64;
    for trace in traces {
        let iterates = match trace.iterates.as_ref() {
            Some(list) => list,
            None => continue,
        };
        for z in iterates {
            let reference = proxy_point(proxy, z)?;
            let distance = joint_distance(z, &reference)?;
            if distance <= tol::DISTANCE_DEGENERATE {
                continue;
            }
            let gap = g.duality_gap(z)?;
            samples += 1;
            max_gap = max_gap.max(gap);
            delta_hat = delta_hat.min(gap / distance);
        }
    }
    if samples < tol::CONDITION_MIN_SAMPLES {
        return Err(Error::InsufficientData {
            needed: tol::CONDITION_MIN_SAMPLES,
            found: samples,
        });
    }
    if max_gap <= tol::ZERO_GAP {
        return Err(Error::ZeroGapInstance { max_gap });
    }
    Ok(ConditionReport {
        delta_hat,
        kappa_hat: g.field_norm().value / delta_hat,
        samples,
        proxy_kind: proxy.kind(),
    })
}
