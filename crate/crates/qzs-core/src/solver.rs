//! First-order equilibrium solvers.
//!
//! Two methods drive the duality gap below a target: an accelerated
//! scheme that minimizes the smoothed gap at a stagewise-decreasing
//! smoothing level, and a projected optimistic gradient method that
//! monitors the last iterate. Both emit a [`ConvergenceTrace`] with one
//! record per gap evaluation; with the default [`NullClock`] the traces
//! are bitwise reproducible.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::E;

use crate::error::{Error, Result};
use crate::game::{GameInstance, GradientPair};
use crate::herm::HermitianMatrix;
use crate::num;
use crate::smoothing::{SmoothingContext, D_MAX};
use crate::spectraplex::{joint_distance, project_joint, JointState};
use crate::tol;

/// Source of wall-clock timestamps for trace records.
pub trait Clock {
    /// Nanoseconds since an arbitrary fixed origin.
    fn now_nanos(&self) -> u64;
}

/// Clock that always reads zero, keeping traces independent of the host.
pub struct NullClock;

impl Clock for NullClock {
    fn now_nanos(&self) -> u64 {
        0
    }
}

/// One gap evaluation during a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Outer stage of the staged solver; always 0 for the optimistic method.
    pub stage: u32,
    /// Iterate index within the stage; 0 marks the starting point probe.
    pub k: u64,
    /// Duality gap at the iterate.
    pub gap: f64,
    /// Smoothed gap at the iterate, when the solver maintains one.
    pub psi_mu: Option<f64>,
    /// Smoothing level in force; 0 when no smoothing is in force.
    pub mu: f64,
    /// Clock reading when the record was made.
    pub ns: u64,
    /// Distance to the previous iterate, when the solver tracks it.
    pub step_dist: Option<f64>,
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Gap at the terminal iterate is at or below the target.
    Converged,
    /// An inner call exhausted its iteration budget.
    InnerCapExceeded,
    /// The stage loop exhausted its budget.
    OuterCapExceeded,
    /// The single-loop solver exhausted its budget.
    IterationCapExceeded,
}

/// Full account of one solve.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
    pub terminal: JointState,
    /// Count of first-order iterations, summed over stages.
    pub total_first_order_iters: u64,
    /// Duality gap at the starting point.
    pub initial_gap: f64,
    pub status: SolveStatus,
    pub warnings: Vec<String>,
    /// Every accepted iterate, starting point first, when requested.
    pub iterates: Option<Vec<JointState>>,
}

/// Outcome of one inner accelerated run.
#[derive(Debug, Clone)]
pub struct InnerRun {
    /// First iterate meeting the accuracy test, or the best seen on a
    /// budget exhaustion.
    pub point: JointState,
    pub iters: u64,
    /// Duality gap at `point`.
    pub final_gap: f64,
    pub hit_cap: bool,
    /// One record per iterate, `stage` left at 0 for the caller to stamp.
    pub records: Vec<TraceRecord>,
    /// Accepted iterates in order when requested, empty otherwise.
    pub iterates: Vec<JointState>,
}

/// Configuration of the staged smoothed-gap solver.
#[derive(Debug, Clone)]
pub struct IterSmoothConfig {
    /// Target duality gap, > 0.
    pub epsilon: f64,
    /// Stagewise accuracy reduction factor, > 1.
    pub gamma: f64,
    pub z0: JointState,
    pub max_outer: u32,
    pub max_inner: u64,
    pub record_iterates: bool,
}

impl IterSmoothConfig {
    /// Defaults: reduction factor e, maximally mixed start, 200 stages,
    /// one million inner iterations per stage.
    pub fn standard(g: &GameInstance, epsilon: f64) -> Self {
        Self {
            epsilon,
            gamma: E,
            z0: JointState::maximally_mixed(g.dim_a(), g.dim_b()),
            max_outer: 200,
            max_inner: 1_000_000,
            record_iterates: false,
        }
    }

    fn validate(&self, g: &GameInstance) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::NonPositiveParameter { name: "epsilon", value: self.epsilon });
        }
        if !self.gamma.is_finite() || self.gamma <= 1.0 {
            return Err(Error::ParameterOutOfRange { name: "gamma", value: self.gamma });
        }
        check_dims(g, &self.z0)
    }
}

/// Configuration of the optimistic gradient solver.
#[derive(Debug, Clone)]
pub struct OgdaConfig {
    /// Target duality gap, > 0.
    pub epsilon: f64,
    /// Step size; `None` selects 1/(8‖F‖).
    pub eta: Option<f64>,
    pub z0: JointState,
    pub max_iters: u64,
    /// Accept a zero or oversized step size instead of rejecting it.
    /// The solve then carries a warning.
    pub allow_degenerate_eta: bool,
    pub record_iterates: bool,
}

impl OgdaConfig {
    /// Defaults: step size 1/(8‖F‖), maximally mixed start, ten million
    /// iterations.
    pub fn standard(g: &GameInstance, epsilon: f64) -> Self {
        Self {
            epsilon,
            eta: None,
            z0: JointState::maximally_mixed(g.dim_a(), g.dim_b()),
            max_iters: 10_000_000,
            allow_degenerate_eta: false,
            record_iterates: false,
        }
    }

    /// Resolved step size and any warning the choice carries.
    fn resolve_eta(&self, g: &GameInstance) -> Result<(f64, Option<String>)> {
        let field = g.field_norm().value;
        let default_eta = if field > 0.0 { 1.0 / (8.0 * field) } else { 1.0 };
        let eta = match self.eta {
            None => return Ok((default_eta, None)),
            Some(eta) => eta,
        };
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::NonPositiveParameter { name: "eta", value: eta });
        }
        let limit = default_eta + 1e-12;
        if self.allow_degenerate_eta {
            if eta == 0.0 || (field > 0.0 && eta > limit) {
                return Ok((eta, Some(String::from(
                    "step size outside the guaranteed range; convergence is not assured",
                ))));
            }
            return Ok((eta, None));
        }
        if eta == 0.0 {
            return Err(Error::NonPositiveParameter { name: "eta", value: eta });
        }
        if field > 0.0 && eta > limit {
            return Err(Error::StepSizeTooLarge { eta, limit });
        }
        Ok((eta, None))
    }

    fn validate(&self, g: &GameInstance) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::NonPositiveParameter { name: "epsilon", value: self.epsilon });
        }
        check_dims(g, &self.z0)
    }
}

fn check_dims(g: &GameInstance, z: &JointState) -> Result<()> {
    if z.alpha().dim() != g.dim_a() {
        return Err(Error::DimensionMismatch { expected: g.dim_a(), found: z.alpha().dim() });
    }
    if z.beta().dim() != g.dim_b() {
        return Err(Error::DimensionMismatch { expected: g.dim_b(), found: z.beta().dim() });
    }
    Ok(())
}

/// Blockwise projected step `Proj(z - scale * dir)`.
fn project_step(z: &JointState, dir: &GradientPair, scale: f64) -> Result<JointState> {
    let a_raw = z.alpha().matrix().add_scaled(-scale, &dir.g_alpha);
    let b_raw = z.beta().matrix().add_scaled(-scale, &dir.g_beta);
    project_joint(&a_raw, &b_raw)
}

/// Accelerated minimization of the smoothed gap at one fixed level.
///
/// Starting from `z_i`, the loop blends the running dual average with
/// the current iterate, takes one projected gradient step of length
/// `1/L_i` with `L_i = ‖F‖²/mu_i`, and stops at the first iterate whose
/// duality gap reaches `eps_i`. The dual average re-projects the start
/// shifted by the weighted gradient history. A starting point already
/// at accuracy returns unchanged with zero iterations. On budget
/// exhaustion the best iterate seen is returned with `hit_cap` set.
pub fn q_smoothing(
    g: &GameInstance,
    z_i: &JointState,
    mu_i: f64,
    eps_i: f64,
    cap: u64,
    record_iterates: bool,
    clock: &dyn Clock,
) -> Result<InnerRun> {
    if !mu_i.is_finite() || mu_i <= 0.0 {
        return Err(Error::NonPositiveParameter { name: "mu_i", value: mu_i });
    }
    if !eps_i.is_finite() || eps_i <= 0.0 {
        return Err(Error::NonPositiveParameter { name: "eps_i", value: eps_i });
    }
    check_dims(g, z_i)?;

    let gap0 = g.duality_gap(z_i)?;
    if !gap0.is_finite() {
        return Err(Error::NonFinite);
    }
    if gap0 <= eps_i {
        return Ok(InnerRun {
            point: z_i.clone(),
            iters: 0,
            final_gap: gap0,
            hit_cap: false,
            records: Vec::new(),
            iterates: Vec::new(),
        });
    }

    let ctx = SmoothingContext::standard(g, mu_i)?;
    let lip = ctx.lipschitz_constant(g);
    let mut z = z_i.clone();
    let mut phi = z_i.clone();
    let mut sum_a = HermitianMatrix::zeros(g.dim_a());
    let mut sum_b = HermitianMatrix::zeros(g.dim_b());
    let mut best_point = z_i.clone();
    let mut best_gap = gap0;
    let mut records = Vec::new();
    let mut iterates = Vec::new();

    for k in 0..cap {
        let blend = 2.0 / (k as f64 + 2.0);
        let z_bar = phi.convex_combination(&z, blend)?;
        let grad = ctx.smoothed_gap_gradient(g, &z_bar)?;
        let z_next = project_step(&z_bar, &grad, 1.0 / lip)?;

        let gap = g.duality_gap(&z_next)?;
        let psi = ctx.smoothed_gap(g, &z_next)?;
        if !gap.is_finite() || !psi.is_finite() {
            return Err(Error::NonFinite);
        }
        records.push(TraceRecord {
            stage: 0,
            k: k + 1,
            gap,
            psi_mu: Some(psi),
            mu: mu_i,
            ns: clock.now_nanos(),
            step_dist: None,
        });
        if record_iterates {
            iterates.push(z_next.clone());
        }
        if gap < best_gap {
            best_gap = gap;
            best_point = z_next.clone();
        }
        if gap <= eps_i {
            return Ok(InnerRun {
                point: z_next,
                iters: k + 1,
                final_gap: gap,
                hit_cap: false,
                records,
                iterates,
            });
        }

        let weight = (k as f64 + 1.0) / 2.0;
        sum_a = sum_a.add_scaled(weight, &grad.g_alpha);
        sum_b = sum_b.add_scaled(weight, &grad.g_beta);
        let avg_a = z_i.alpha().matrix().add_scaled(-1.0 / lip, &sum_a);
        let avg_b = z_i.beta().matrix().add_scaled(-1.0 / lip, &sum_b);
        phi = project_joint(&avg_a, &avg_b)?;
        z = z_next;
    }

    Ok(InnerRun {
        point: best_point,
        iters: cap,
        final_gap: best_gap,
        hit_cap: true,
        records,
        iterates,
    })
}

/// Staged solve: run the accelerated inner loop at accuracy `eps_i` and
/// smoothing level `eps_i / (2 d_max)`, tighten `eps_i` by the reduction
/// factor, and stop once the duality gap reaches the target.
pub fn iter_smooth(
    g: &GameInstance,
    cfg: &IterSmoothConfig,
    clock: &dyn Clock,
) -> Result<ConvergenceTrace> {
    cfg.validate(g)?;

    let gap0 = g.duality_gap(&cfg.z0)?;
    if !gap0.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut records = Vec::new();
    records.push(TraceRecord {
        stage: 0,
        k: 0,
        gap: gap0,
        psi_mu: None,
        mu: 0.0,
        ns: clock.now_nanos(),
        step_dist: None,
    });
    let mut iterates = cfg.record_iterates.then(|| alloc::vec![cfg.z0.clone()]);

    if gap0 <= cfg.epsilon {
        return Ok(ConvergenceTrace {
            records,
            terminal: cfg.z0.clone(),
            total_first_order_iters: 0,
            initial_gap: gap0,
            status: SolveStatus::Converged,
            warnings: Vec::new(),
            iterates,
        });
    }

    let mut eps_i = gap0;
    let mut z = cfg.z0.clone();
    let mut total = 0u64;
    let mut status = SolveStatus::OuterCapExceeded;

    for stage in 0..cfg.max_outer {
        let mu_i = eps_i / (2.0 * D_MAX);
        let run = q_smoothing(g, &z, mu_i, eps_i, cfg.max_inner, cfg.record_iterates, clock)?;
        for mut record in run.records {
            record.stage = stage;
            records.push(record);
        }
        if let Some(list) = iterates.as_mut() {
            list.extend(run.iterates);
        }
        total += run.iters;
        z = run.point;
        if run.hit_cap {
            status = SolveStatus::InnerCapExceeded;
            break;
        }
        if run.final_gap <= cfg.epsilon {
            status = SolveStatus::Converged;
            break;
        }
        eps_i /= cfg.gamma;
    }

    Ok(ConvergenceTrace {
        records,
        terminal: z,
        total_first_order_iters: total,
        initial_gap: gap0,
        status,
        warnings: Vec::new(),
        iterates,
    })
}

/// Projected optimistic gradient solve with last-iterate gap monitoring.
///
/// Each iteration steps the anchor point against the field at the
/// previous iterate, projects, and tests the gap; the anchor then moves
/// against the field at the new iterate. The field at each iterate is
/// computed once and reused.
pub fn ogda_solve(
    g: &GameInstance,
    cfg: &OgdaConfig,
    clock: &dyn Clock,
) -> Result<ConvergenceTrace> {
    cfg.validate(g)?;
    let (eta, warning) = cfg.resolve_eta(g)?;
    let mut warnings = Vec::new();
    if let Some(text) = warning {
        warnings.push(text);
    }

    let gap0 = g.duality_gap(&cfg.z0)?;
    if !gap0.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut records = Vec::new();
    records.push(TraceRecord {
        stage: 0,
        k: 0,
        gap: gap0,
        psi_mu: None,
        mu: 0.0,
        ns: clock.now_nanos(),
        step_dist: None,
    });
    let mut iterates = cfg.record_iterates.then(|| alloc::vec![cfg.z0.clone()]);

    let mut anchor = cfg.z0.clone();
    let mut prev = cfg.z0.clone();
    let mut field_prev = g.gradient_field(&prev)?;
    let mut best_point = cfg.z0.clone();
    let mut best_gap = gap0;
    let mut total = 0u64;

    for t in 1..=cfg.max_iters {
        let z_t = project_step(&anchor, &field_prev, eta)?;
        let gap = g.duality_gap(&z_t)?;
        if !gap.is_finite() {
            return Err(Error::NonFinite);
        }
        let moved = joint_distance(&z_t, &prev)?;
        records.push(TraceRecord {
            stage: 0,
            k: t,
            gap,
            psi_mu: None,
            mu: 0.0,
            ns: clock.now_nanos(),
            step_dist: Some(moved),
        });
        if let Some(list) = iterates.as_mut() {
            list.push(z_t.clone());
        }
        total = t;
        if gap < best_gap {
            best_gap = gap;
            best_point = z_t.clone();
        }
        if gap <= cfg.epsilon {
            return Ok(ConvergenceTrace {
                records,
                terminal: z_t,
                total_first_order_iters: total,
                initial_gap: gap0,
                status: SolveStatus::Converged,
                warnings,
                iterates,
            });
        }

        let field_t = g.gradient_field(&z_t)?;
        anchor = project_step(&anchor, &field_t, eta)?;
        prev = z_t;
        field_prev = field_t;
    }

    Ok(ConvergenceTrace {
        records,
        terminal: best_point,
        total_first_order_iters: total,
        initial_gap: gap0,
        status: SolveStatus::IterationCapExceeded,
        warnings,
        iterates,
    })
}

/// Least-squares slope of `ln(gap)` against the iterate index over the
/// trailing `tail_fraction` of the trace, with the fit's r².
///
/// Records whose gap is at or below the floor `1e-14` are dropped as
/// floor-limited. A tail that is constant to within roundoff fits slope
/// 0 with r² defined as 1. The fit needs at least two surviving records
/// at distinct indices.
pub fn fit_linear_rate(trace: &ConvergenceTrace, tail_fraction: f64) -> Result<(f64, f64)> {
    if trace.records.len() < tol::RATE_MIN_RECORDS {
        return Err(Error::InsufficientData {
            needed: tol::RATE_MIN_RECORDS,
            found: trace.records.len(),
        });
    }
    if !tail_fraction.is_finite() || tail_fraction <= 0.0 || tail_fraction > 1.0 {
        return Err(Error::ParameterOutOfRange { name: "tail_fraction", value: tail_fraction });
    }

    let n = trace.records.len();
    let mut take = (tail_fraction * n as f64) as usize;
    if (take as f64) < tail_fraction * n as f64 {
        take += 1;
    }
    let take = take.clamp(1, n);

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in &trace.records[n - take..] {
        if record.gap <= tol::RATE_GAP_FLOOR {
            continue;
        }
        xs.push(record.k as f64);
        ys.push(num::ln(record.gap));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, found: xs.len() });
    }

    let count = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, found: 1 });
    }
    let flat = 1e-12 * (1.0 + num::abs(y_mean));
    if syy <= count * flat * flat {
        return Ok((0.0, 1.0));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let fitted = intercept + slope * x;
        ss_res += (y - fitted) * (y - fitted);
    }
    let r2 = (1.0 - ss_res / syy).clamp(0.0, 1.0);
    Ok((slope, r2))
}
