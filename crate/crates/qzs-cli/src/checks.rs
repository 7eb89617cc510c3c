//! Runtime property suite behind the `verify` subcommand.
//!
//! Each check draws its own seeded samples, so the suite is
//! deterministic run to run. A failing check reports the round that
//! produced the counterexample in its detail string.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use qzs_core::game::GameInstance;
use qzs_core::herm::{eig, frobenius_inner, HermitianMatrix, C64};
use qzs_core::smoothing::SmoothingContext;
use qzs_core::solver::{ogda_solve, NullClock, OgdaConfig};
use qzs_core::spectraplex::{
    joint_distance, project_spectraplex, DensityMatrix, JointState,
};
use qzs_core::verify::{spms_scan, NashProxy};

use crate::gen;
use crate::run::corner_start;

/// Deliberate defect injected to prove a check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Negate the analytic gradient inside the gradient check.
    GradientSignFlip,
}

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from_result(name: &'static str, result: Result<String, String>) -> Self {
        match result {
            Ok(detail) => CheckOutcome { name, passed: true, detail },
            Err(detail) => CheckOutcome { name, passed: false, detail },
        }
    }
}

/// Sample a Hermitian matrix with independent Gaussian entries of the
/// given scale.
pub fn rand_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> HermitianMatrix {
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        entries[i * dim + i] = C64::new(scale * d, 0.0);
        for j in (i + 1)..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = C64::new(scale * FRAC_1_SQRT_2 * re, scale * FRAC_1_SQRT_2 * im);
            entries[i * dim + j] = v;
            entries[j * dim + i] = v.conj();
        }
    }
    HermitianMatrix::from_entries(dim, entries).expect("mirrored entries are Hermitian")
}

/// Sample a traceless Hermitian direction with unit Frobenius norm.
pub fn rand_traceless_direction(rng: &mut impl Rng, dim: usize) -> HermitianMatrix {
    loop {
        let raw = rand_hermitian(rng, dim, 1.0);
        let centered = raw.add_scaled(-raw.trace() / dim as f64, &HermitianMatrix::identity(dim));
        let norm = centered.frob_norm();
        if norm > 1e-9 {
            return centered.scale(1.0 / norm);
        }
    }
}

/// Sample a full-rank density matrix via an eigenvalue lift.
pub fn rand_density(rng: &mut impl Rng, dim: usize) -> DensityMatrix {
    let raw = rand_hermitian(rng, dim, 1.0);
    let dec = eig(&raw).expect("random Hermitian decomposes");
    let lifted: Vec<f64> = dec.eigenvalues.iter().map(|l| l.abs() + 0.05).collect();
    let total: f64 = lifted.iter().sum();
    let unit: Vec<f64> = lifted.iter().map(|l| l / total).collect();
    DensityMatrix::new(dec.recombine(&unit)).expect("lifted spectrum is a state")
}

/// Sample an independent pair of density matrices.
pub fn rand_joint(rng: &mut impl Rng, dim_a: usize, dim_b: usize) -> JointState {
    let alpha = rand_density(rng, dim_a);
    let beta = rand_density(rng, dim_b);
    JointState::new(alpha, beta)
}

fn matching_pennies() -> Result<GameInstance, String> {
    gen::gen_classical_embedding(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).map_err(|e| e.to_string())
}

fn stock_povm_game(seed: u64, outcomes: usize) -> Result<GameInstance, String> {
    gen::gen_random_povm_game(seed, 2, 2, outcomes).map_err(|e| e.to_string())
}

fn projection_vi() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut rounds = 0usize;
    for dim in [2usize, 4, 8] {
        for round in 0..20 {
            let x1 = rand_hermitian(&mut rng, dim, 3.0);
            let x2 = rand_hermitian(&mut rng, dim, 3.0);
            let p1 = project_spectraplex(&x1).map_err(|e| e.to_string())?;
            let p2 = project_spectraplex(&x2).map_err(|e| e.to_string())?;

            let again = project_spectraplex(p1.matrix()).map_err(|e| e.to_string())?;
            let drift = again.matrix().sub(p1.matrix()).frob_norm();
            if drift > 1e-10 {
                return Err(format!("dim {dim} round {round}: projection moved a state by {drift:.3e}"));
            }

            let image_dist = p1.matrix().sub(p2.matrix()).frob_norm();
            let raw_dist = x1.sub(&x2).frob_norm();
            if image_dist > raw_dist + 1e-10 {
                return Err(format!("dim {dim} round {round}: projection expanded a pair"));
            }

            let residual = x1.sub(p1.matrix());
            for probe in 0..40 {
                let rho = rand_density(&mut rng, dim);
                let vi = frobenius_inner(&residual, &rho.matrix().sub(p1.matrix()))
                    .map_err(|e| e.to_string())?;
                if vi > 1e-8 {
                    return Err(format!(
                        "dim {dim} round {round} probe {probe}: variational inequality violated by {vi:.3e}"
                    ));
                }
                rounds += 1;
            }
        }
    }
    Ok(format!("{rounds} probes across dims 2, 4, 8"))
}

fn adjoint_identity() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut rounds = 0usize;
    for (qa, qb) in [(1u32, 1u32), (1, 2), (2, 1)] {
        let joint = 1usize << (qa + qb);
        let obs = rand_hermitian(&mut rng, joint, 1.0);
        let g = GameInstance::from_observable(qa, qb, obs).map_err(|e| e.to_string())?;
        for round in 0..20 {
            let alpha = rand_density(&mut rng, g.dim_a());
            let beta = rand_density(&mut rng, g.dim_b());
            let lhs = frobenius_inner(
                alpha.matrix(),
                &g.superop(&beta).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            let rhs = frobenius_inner(
                &g.superop_adjoint(&alpha).map_err(|e| e.to_string())?,
                beta.matrix(),
            )
            .map_err(|e| e.to_string())?;
            let pay = g
                .payoff(&JointState::new(alpha, beta))
                .map_err(|e| e.to_string())?;
            let tol = 1e-10 * pay.abs().max(1.0);
            if (lhs - rhs).abs() > tol || (lhs - pay).abs() > tol {
                return Err(format!(
                    "qubits ({qa},{qb}) round {round}: pairings disagree, {lhs:.12e} vs {rhs:.12e} vs {pay:.12e}"
                ));
            }
            rounds += 1;
        }
    }
    Ok(format!("{rounds} pairings across three dimension splits"))
}

fn sandwich() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let games = [matching_pennies()?, stock_povm_game(7, 3)?];
    let mut rounds = 0usize;
    for (gi, g) in games.iter().enumerate() {
        for mu in [1.0, 0.1, 0.01] {
            let ctx = SmoothingContext::standard(g, mu).map_err(|e| e.to_string())?;
            let spread = mu * ctx.d_max();
            for round in 0..30 {
                let z = rand_joint(&mut rng, g.dim_a(), g.dim_b());
                let psi = ctx.smoothed_gap(g, &z).map_err(|e| e.to_string())?;
                let gap = g.duality_gap(&z).map_err(|e| e.to_string())?;
                if psi > gap + 1e-8 || gap > psi + spread + 1e-8 {
                    return Err(format!(
                        "game {gi} mu {mu} round {round}: psi {psi:.6e} vs gap {gap:.6e} outside the sandwich"
                    ));
                }
                rounds += 1;
            }
        }
    }
    Ok(format!("{rounds} states, mu down to 0.01"))
}

fn gradient(mutation: Option<Mutation>) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let games = [matching_pennies()?, stock_povm_game(9, 4)?];
    let step = 1e-5;
    let mut rounds = 0usize;
    for (gi, g) in games.iter().enumerate() {
        for mu in [0.5, 0.05] {
            let ctx = SmoothingContext::standard(g, mu).map_err(|e| e.to_string())?;
            for round in 0..10 {
                let mixed = JointState::maximally_mixed(g.dim_a(), g.dim_b());
                let z = mixed
                    .convex_combination(&rand_joint(&mut rng, g.dim_a(), g.dim_b()), 0.3)
                    .map_err(|e| e.to_string())?;
                let grad = ctx.smoothed_gap_gradient(g, &z).map_err(|e| e.to_string())?;
                for direction in 0..4 {
                    let da = rand_traceless_direction(&mut rng, g.dim_a());
                    let db = rand_traceless_direction(&mut rng, g.dim_b());
                    let mut analytic = frobenius_inner(&grad.g_alpha, &da)
                        .map_err(|e| e.to_string())?
                        + frobenius_inner(&grad.g_beta, &db).map_err(|e| e.to_string())?;
                    if mutation == Some(Mutation::GradientSignFlip) {
                        analytic = -analytic;
                    }
                    let probe = |s: f64| -> Result<f64, String> {
                        let alpha = DensityMatrix::new(z.alpha().matrix().add_scaled(s, &da))
                            .map_err(|e| e.to_string())?;
                        let beta = DensityMatrix::new(z.beta().matrix().add_scaled(s, &db))
                            .map_err(|e| e.to_string())?;
                        ctx.smoothed_gap(g, &JointState::new(alpha, beta))
                            .map_err(|e| e.to_string())
                    };
                    let fd = (probe(step)? - probe(-step)?) / (2.0 * step);
                    if (fd - analytic).abs() > 1e-5 * fd.abs().max(1.0) {
                        return Err(format!(
                            "game {gi} mu {mu} round {round} direction {direction}: finite difference {fd:.8e} vs analytic {analytic:.8e}"
                        ));
                    }
                    rounds += 1;
                }
            }
        }
    }
    Ok(format!("{rounds} directional probes"))
}

fn lipschitz() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let games = [matching_pennies()?, stock_povm_game(13, 4)?];
    let mut rounds = 0usize;
    for (gi, g) in games.iter().enumerate() {
        for mu in [0.5, 0.05] {
            let ctx = SmoothingContext::standard(g, mu).map_err(|e| e.to_string())?;
            let bound = ctx.lipschitz_constant(g);
            for round in 0..250 {
                let z1 = rand_joint(&mut rng, g.dim_a(), g.dim_b());
                let z2 = rand_joint(&mut rng, g.dim_a(), g.dim_b());
                let g1 = ctx.smoothed_gap_gradient(g, &z1).map_err(|e| e.to_string())?;
                let g2 = ctx.smoothed_gap_gradient(g, &z2).map_err(|e| e.to_string())?;
                let da = g1.g_alpha.sub(&g2.g_alpha).frob_norm();
                let db = g1.g_beta.sub(&g2.g_beta).frob_norm();
                let num = (da * da + db * db).sqrt();
                let den = joint_distance(&z1, &z2).map_err(|e| e.to_string())?;
                if num > bound * den + 1e-8 {
                    return Err(format!(
                        "game {gi} mu {mu} round {round}: gradient moved {num:.6e} over distance {den:.6e}, bound {bound:.6e}"
                    ));
                }
                rounds += 1;
            }
        }
    }
    Ok(format!("{rounds} pairs against the stated constant"))
}

fn spms_ratio() -> Result<String, String> {
    let g = matching_pennies()?;
    let proxy = NashProxy::AnalyticDiagonal {
        x_star: vec![0.5, 0.5],
        y_star: vec![0.5, 0.5],
    };
    let mut cfg = OgdaConfig::standard(&g, 1e-5);
    cfg.z0 = corner_start(&g);
    cfg.record_iterates = true;
    let trace = ogda_solve(&g, &cfg, &NullClock).map_err(|e| e.to_string())?;
    let iterates = trace
        .iterates
        .ok_or_else(|| "solver recorded no iterates".to_string())?;
    let report =
        spms_scan(&g, &iterates, &proxy, "matching-pennies").map_err(|e| e.to_string())?;
    if report.samples == 0 {
        return Err("no iterate cleared the degeneracy floor".to_string());
    }
    if !report.min_ratio.is_finite() || report.min_ratio <= 0.0 {
        return Err(format!("degenerate ratio floor {:.6e}", report.min_ratio));
    }
    Ok(format!(
        "{} samples, ratio within [{:.4e}, {:.4e}]",
        report.samples, report.min_ratio, report.max_ratio
    ))
}

/// All check names, in execution order.
pub const CHECK_NAMES: [&str; 6] = [
    "projection-vi",
    "adjoint-identity",
    "sandwich",
    "gradient",
    "lipschitz",
    "spms-ratio",
];

/// Run every check whose name contains the filter substring.
pub fn run_all(filter: Option<&str>, mutation: Option<Mutation>) -> Vec<CheckOutcome> {
    let selected = |name: &str| filter.is_none_or(|f| name.contains(f));
    let mut outcomes = Vec::new();
    if selected("projection-vi") {
        outcomes.push(CheckOutcome::from_result("projection-vi", projection_vi()));
    }
    if selected("adjoint-identity") {
        outcomes.push(CheckOutcome::from_result("adjoint-identity", adjoint_identity()));
    }
    if selected("sandwich") {
        outcomes.push(CheckOutcome::from_result("sandwich", sandwich()));
    }
    if selected("gradient") {
        outcomes.push(CheckOutcome::from_result("gradient", gradient(mutation)));
    }
    if selected("lipschitz") {
        outcomes.push(CheckOutcome::from_result("lipschitz", lipschitz()));
    }
    if selected("spms-ratio") {
        outcomes.push(CheckOutcome::from_result("spms-ratio", spms_ratio()));
    }
    outcomes
}

/// Print one line per check and map the suite to an exit code.
pub fn run_verify(filter: Option<&str>, mutation: Option<Mutation>) -> i32 {
    let outcomes = run_all(filter, mutation);
    if outcomes.is_empty() {
        eprintln!("no check matches the filter");
        return 1;
    }
    let mut all_passed = true;
    for outcome in &outcomes {
        let verdict = if outcome.passed { "pass" } else { "FAIL" };
        if outcome.detail.is_empty() {
            println!("{verdict}  {}", outcome.name);
        } else {
            println!("{verdict}  {}  ({})", outcome.name, outcome.detail);
        }
        all_passed &= outcome.passed;
    }
    if all_passed {
        0
    } else {
        1
    }
}
