//! Semidefinite-program ingestion.
//!
//! A strictly positive instance carries weight matrices `A`, `B` and the
//! Choi matrix of a positive map. Conjugating the Choi matrix by inverse
//! square roots turns the program into trace form; an index reshuffle
//! identifies the normalized map with a game observable whose minimizing
//! player carries the map's input side, so the solvers apply unchanged.
//! The reciprocal of the estimated game value brackets the program
//! optimum multiplicatively.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::herm::{eig, lambda_extremes, HermitianMatrix, C64};
use crate::solver::{
    iter_smooth, ogda_solve, Clock, ConvergenceTrace, IterSmoothConfig, OgdaConfig, SolveStatus,
};
use crate::tol;

/// Margin factor for the slack block that fills padded dimensions. Kept
/// small because the field norm, and with it every iteration budget,
/// scales linearly with the slack value.
const PAD_MARGIN: f64 = 10.0;

/// Weighted program `max tr(Y) subject to Y >= 0, map(Y) <= A` over
/// `B`-scaled inputs, held in Choi representation. After trace-form
/// normalization it reads `max tr(Y) subject to Y >= 0, map(Y) <= I`,
/// whose optimum is the reciprocal of the derived game's value.
#[derive(Debug, Clone)]
pub struct SdpInstance {
    a: HermitianMatrix,
    b: HermitianMatrix,
    choi: HermitianMatrix,
}

/// Which solver runs on the derived game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpAlgorithm {
    IterSmooth,
    Ogda,
}

/// Optimum estimate with its multiplicative error bracket.
#[derive(Debug, Clone)]
pub struct SdpResult {
    pub opt_estimate: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
    /// Relative half-width `epsilon / (2 * game_value_estimate)`.
    pub xi: f64,
    pub game_value_estimate: f64,
    pub trace: ConvergenceTrace,
}

impl SdpInstance {
    /// Validate strict positivity of the weights and of the map, the
    /// latter exactly on the identity and by spot-check on sampled
    /// densities.
    pub fn new(a: HermitianMatrix, b: HermitianMatrix, choi: HermitianMatrix) -> Result<Self> {
        let n = a.dim();
        let m = b.dim();
        let joint = n
            .checked_mul(m)
            .filter(|d| *d <= tol::DIM_CAP)
            .ok_or(Error::DimensionCap { requested: usize::MAX, cap: tol::DIM_CAP })?;
        if choi.dim() != joint {
            return Err(Error::DimensionMismatch { expected: joint, found: choi.dim() });
        }
        for weight in [&a, &b] {
            let (lo, _) = lambda_extremes(weight)?;
            if lo <= tol::SDP_MIN_EIG {
                return Err(Error::NotPositive { min_eigenvalue: lo });
            }
        }

        let on_identity = apply_choi_map(&choi, n, m, &HermitianMatrix::identity(m))?;
        let (lo, _) = lambda_extremes(&on_identity)?;
        if lo <= tol::SDP_MAP_POSITIVITY {
            return Err(Error::NotPositive { min_eigenvalue: lo });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0x5d9_0001);
        for _ in 0..tol::SDP_SPOT_SAMPLES {
            let rho = sample_density(&mut rng, m)?;
            let image = apply_choi_map(&choi, n, m, &rho)?;
            let (lo, _) = lambda_extremes(&image)?;
            if lo < -tol::SDP_MAP_SAMPLE {
                return Err(Error::NotPositive { min_eigenvalue: lo });
            }
        }

        Ok(SdpInstance { a, b, choi })
    }

    /// Output-side dimension `n`.
    pub fn dim_out(&self) -> usize {
        self.a.dim()
    }

    /// Input-side dimension `m`.
    pub fn dim_in(&self) -> usize {
        self.b.dim()
    }

    pub fn weight_a(&self) -> &HermitianMatrix {
        &self.a
    }

    pub fn weight_b(&self) -> &HermitianMatrix {
        &self.b
    }

    pub fn choi(&self) -> &HermitianMatrix {
        &self.choi
    }

    /// Choi matrix of the trace-form map
    /// `Y -> A^{-1/2} map(B^{-1/2} Y B^{-1/2}) A^{-1/2}`, obtained by
    /// conjugating with `A^{-1/2} tensor (B^{-1/2})^T`. The normalized
    /// map is re-checked for strict positivity on the identity.
    pub fn normalize_trace_form(&self) -> Result<HermitianMatrix> {
        let n = self.dim_out();
        let m = self.dim_in();
        let p = inv_sqrt(&self.a)?;
        let q = inv_sqrt(&self.b)?;
        let s = kronecker(&p, &transpose(&q)?)?;
        let normalized = conjugate_both_sides(&s, &self.choi)?;

        let on_identity = apply_choi_map(&normalized, n, m, &HermitianMatrix::identity(m))?;
        let (lo, _) = lambda_extremes(&on_identity)?;
        if lo <= tol::SDP_MAP_POSITIVITY {
            return Err(Error::NotPositive { min_eigenvalue: lo });
        }
        Ok(normalized)
    }
}

/// Apply the map held by `choi` to `y`:
/// `out_ij = sum_{k,q} choi_{(i,k),(j,q)} y_{k,q}`.
pub fn apply_choi_map(
    choi: &HermitianMatrix,
    n: usize,
    m: usize,
    y: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if choi.dim() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: choi.dim() });
    }
    if y.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: y.dim() });
    }
    HermitianMatrix::from_fn(n, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..m {
            for q in 0..m {
                acc += choi.entry(i * m + k, j * m + q) * y.entry(k, q);
            }
        }
        acc
    })
}

/// Adjoint of the map held by `choi`:
/// `out_kq = sum_{i,j} choi_{(i,q),(j,k)} x_{j,i}`.
pub fn apply_choi_map_adjoint(
    choi: &HermitianMatrix,
    n: usize,
    m: usize,
    x: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    if choi.dim() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: choi.dim() });
    }
    if x.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
    }
    HermitianMatrix::from_fn(m, |k, q| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += choi.entry(i * m + q, j * m + k) * x.entry(j, i);
            }
        }
        acc
    })
}

/// Observable whose game pairs the minimizing player with the map held
/// by `choi` and the maximizing player with its adjoint:
/// `out_{(i,k),(j,q)} = choi_{(k,j),(q,i)}`, where `i, j` index the
/// first player (the map's input side, dimension `m`) and `k, q` the
/// second player (the output side, dimension `n`). Hermiticity is
/// preserved entrywise.
pub fn observable_from_choi(choi: &HermitianMatrix, n: usize, m: usize) -> Result<HermitianMatrix> {
    if choi.dim() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: choi.dim() });
    }
    HermitianMatrix::from_fn(m * n, |r, c| {
        let (i, k) = (r / n, r % n);
        let (j, q) = (c / n, c % n);
        choi.entry(k * m + j, q * m + i)
    })
}

/// Game carrying the map held by `normalized_choi`: the adjoint
/// superoperator applies the map to the first player's state, so the
/// upper value `lambda_max(map(alpha))` is minimized and the reciprocal
/// of the game value is the trace-form optimum. Dimensions that are not
/// powers of two are embedded into the next power of two; the padded
/// block carries a large positive slack on the first player's extra
/// rows, so optimal play never activates a padded direction and the
/// value is unchanged.
pub fn sdp_to_game(normalized_choi: &HermitianMatrix, n: usize, m: usize) -> Result<GameInstance> {
    if n == 0 || m == 0 {
        return Err(Error::EmptyInput);
    }
    if normalized_choi.dim() != n * m {
        return Err(Error::DimensionMismatch { expected: n * m, found: normalized_choi.dim() });
    }
    let wide_a = m.next_power_of_two();
    let wide_b = n.next_power_of_two();
    let base = observable_from_choi(normalized_choi, n, m)?;
    let observable = if wide_a == m && wide_b == n {
        base
    } else {
        let on_identity = apply_choi_map(normalized_choi, n, m, &HermitianMatrix::identity(m))?;
        let (_, hi) = lambda_extremes(&on_identity)?;
        let slack = PAD_MARGIN * hi.max(1.0);
        let joint = wide_a
            .checked_mul(wide_b)
            .filter(|d| *d <= tol::DIM_CAP)
            .ok_or(Error::DimensionCap { requested: usize::MAX, cap: tol::DIM_CAP })?;
        HermitianMatrix::from_fn(joint, |r, c| {
            let (i, k) = (r / wide_b, r % wide_b);
            let (j, q) = (c / wide_b, c % wide_b);
            let mut value = C64::new(0.0, 0.0);
            if i < m && j < m && k < n && q < n {
                value = base.entry(i * n + k, j * n + q);
            }
            if i == j && i >= m && k == q {
                value += C64::new(slack, 0.0);
            }
            value
        })?
    };
    GameInstance::from_observable(wide_a.trailing_zeros(), wide_b.trailing_zeros(), observable)
}

/// Normalize, identify with a game, solve to gap `epsilon`, and bracket
/// the program optimum as the reciprocal of the estimated value.
pub fn solve_sdp(
    s: &SdpInstance,
    epsilon: f64,
    algorithm: SdpAlgorithm,
    clock: &dyn Clock,
) -> Result<SdpResult> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::NonPositiveParameter { name: "epsilon", value: epsilon });
    }
    let n = s.dim_out();
    let m = s.dim_in();
    let normalized = s.normalize_trace_form()?;
    let game = sdp_to_game(&normalized, n, m)?;

    let mut trace = match algorithm {
        SdpAlgorithm::IterSmooth => {
            iter_smooth(&game, &IterSmoothConfig::standard(&game, epsilon), clock)?
        }
        SdpAlgorithm::Ogda => ogda_solve(&game, &OgdaConfig::standard(&game, epsilon), clock)?,
    };
    if trace.status != SolveStatus::Converged {
        let gap = game.duality_gap(&trace.terminal)?;
        return Err(Error::DidNotConverge { gap, target: epsilon });
    }

    let upper = game.upper_value(trace.terminal.alpha())?;
    let lower = game.lower_value(trace.terminal.beta())?;
    let value_estimate = 0.5 * (upper + lower);

    let first_bound = epsilon;
    let second_bound = if value_estimate > epsilon {
        2.0 * epsilon / value_estimate
    } else {
        epsilon
    };
    for (label, block, live, bound) in [
        ("first", trace.terminal.alpha(), m, first_bound),
        ("second", trace.terminal.beta(), n, second_bound),
    ] {
        let dim = block.dim();
        if dim == live {
            continue;
        }
        let padded_mass: f64 = (live..dim).map(|i| block.matrix().entry(i, i).re).sum();
        if padded_mass > bound {
            trace.warnings.push(format!(
                "padded {label}-player directions carry mass {padded_mass:.3e} at the terminal \
                 iterate, more than the gap bound {bound:.3e} explains; the recovered value may \
                 be biased"
            ));
        }
    }
    let xi = epsilon / (2.0 * value_estimate);
    if !xi.is_finite() || xi <= 0.0 || xi >= 1.0 {
        return Err(Error::AccuracyTooCoarse { xi });
    }
    let opt_estimate = 1.0 / value_estimate;
    Ok(SdpResult {
        opt_estimate,
        interval_lo: opt_estimate / (1.0 + xi),
        interval_hi: opt_estimate / (1.0 - xi),
        xi,
        game_value_estimate: value_estimate,
        trace,
    })
}

/// Inverse square root through the spectral decomposition, rejecting
/// matrices that are not strictly positive or are too ill-conditioned
/// to invert reliably.
fn inv_sqrt(w: &HermitianMatrix) -> Result<HermitianMatrix> {
    let decomp = eig(w)?;
    let lo = decomp.eigenvalues[0];
    let hi = decomp.eigenvalues[decomp.eigenvalues.len() - 1];
    if lo <= tol::SDP_MIN_EIG {
        return Err(Error::NotPositive { min_eigenvalue: lo });
    }
    let condition = hi / lo;
    if condition > tol::SDP_MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    let values: Vec<f64> = decomp.eigenvalues.iter().map(|l| 1.0 / crate::num::sqrt(*l)).collect();
    Ok(decomp.recombine(&values))
}

fn transpose(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    HermitianMatrix::from_fn(h.dim(), |i, j| h.entry(j, i))
}

fn kronecker(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    let (dx, dy) = (x.dim(), y.dim());
    HermitianMatrix::from_fn(dx * dy, |r, c| {
        let (i, k) = (r / dy, r % dy);
        let (j, q) = (c / dy, c % dy);
        x.entry(i, j) * y.entry(k, q)
    })
}

/// `s * mid * s` for Hermitian `s`, via two dense products.
fn conjugate_both_sides(s: &HermitianMatrix, mid: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = s.dim();
    if mid.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: mid.dim() });
    }
    let mut left = alloc::vec![C64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..d {
                acc += s.entry(r, p) * mid.entry(p, c);
            }
            left[r * d + c] = acc;
        }
    }
    HermitianMatrix::from_fn(d, |r, c| {
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..d {
            acc += left[r * d + p] * s.entry(p, c);
        }
        acc
    })
}

/// Deterministic density sample for the positivity spot-check: square a
/// random Hermitian matrix, add a small ridge, normalize the trace.
fn sample_density<R: Rng>(rng: &mut R, dim: usize) -> Result<HermitianMatrix> {
    let mut entries = alloc::vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        entries[i * dim + i] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..dim {
            let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            entries[i * dim + j] = v;
            entries[j * dim + i] = v.conj();
        }
    }
    let raw = HermitianMatrix::from_entries(dim, entries)?;
    let decomp = eig(&raw)?;
    let values: Vec<f64> = decomp.eigenvalues.iter().map(|l| l * l + 1e-3).collect();
    let squared = decomp.recombine(&values);
    let trace = squared.trace();
    Ok(squared.scale(1.0 / trace))
}
