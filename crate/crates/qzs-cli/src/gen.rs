//! Instance generators: random measurement games and padded classical
//! embeddings, plus the named 2x2 tables the verification suite and
//! benchmarks rely on.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use qzs_core::game::{GameInstance, Povm};
use qzs_core::herm::{eig, ComplexMatrix, HermitianMatrix, C64};

use crate::{CliError, CliResult};

/// Utility placed on padding rows; the minimizer never plays them.
pub const PAD_ROW_UTILITY: f64 = 10.0;
/// Utility placed on padding columns; the maximizer never plays them.
pub const PAD_COL_UTILITY: f64 = -10.0;

const NORMALIZER_ATTEMPTS: usize = 10;
const NORMALIZER_MIN_EIG: f64 = 1e-9;

fn draw_complex_gaussian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g.set(i, j, C64::new(re, im));
        }
    }
    g
}

fn hermitian_from_complex(m: &ComplexMatrix) -> CliResult<HermitianMatrix> {
    Ok(HermitianMatrix::from_fn(m.dim(), |i, j| m.get(i, j))?)
}

/// One batch of measurement elements: Gram draws normalized through the
/// inverse square root of their sum, so the elements sum to the
/// identity. Fails when the sum is too close to singular.
fn draw_povm_elements(
    rng: &mut ChaCha8Rng,
    dim: usize,
    n_outcomes: usize,
) -> CliResult<Option<Vec<HermitianMatrix>>> {
    let mut raw = Vec::with_capacity(n_outcomes);
    let mut total = HermitianMatrix::zeros(dim);
    for _ in 0..n_outcomes {
        let g = draw_complex_gaussian(rng, dim);
        let gram = hermitian_from_complex(&g.adjoint().mul(&g))?;
        total = total.add(&gram);
        raw.push(gram);
    }
    let decomp = eig(&total)?;
    let lo = decomp.eigenvalues[0];
    let hi = decomp.eigenvalues[dim - 1];
    if lo <= NORMALIZER_MIN_EIG * hi.max(1.0) {
        return Ok(None);
    }
    let inv_sqrt: Vec<f64> = decomp.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
    let normalizer = decomp.recombine(&inv_sqrt).to_complex();
    let mut elements = Vec::with_capacity(n_outcomes);
    for gram in &raw {
        let sandwiched = normalizer.mul(&gram.to_complex()).mul(&normalizer);
        elements.push(hermitian_from_complex(&sandwiched)?);
    }
    Ok(Some(elements))
}

/// Draw a random measurement game on `dim_a x dim_b`: PSD Gram draws
/// normalized into a complete measurement, one uniform utility in
/// [-1, 1] per outcome. A single outcome normalizes to the identity.
/// The same seed reproduces the same game bitwise.
pub fn gen_random_povm_game(
    seed: u64,
    dim_a: usize,
    dim_b: usize,
    n_outcomes: usize,
) -> CliResult<GameInstance> {
    for (label, dim) in [("dim_a", dim_a), ("dim_b", dim_b)] {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(CliError::Input(format!("{label} = {dim} is not a power of two")));
        }
    }
    if n_outcomes == 0 {
        return Err(CliError::Input("n_outcomes must be at least 1".into()));
    }
    let joint = dim_a
        .checked_mul(dim_b)
        .ok_or_else(|| CliError::Input("joint dimension overflows".into()))?;
    let qubits_a = dim_a.trailing_zeros();
    let qubits_b = dim_b.trailing_zeros();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements = if n_outcomes == 1 {
        vec![HermitianMatrix::identity(joint)]
    } else {
        let mut drawn = None;
        for _ in 0..NORMALIZER_ATTEMPTS {
            if let Some(batch) = draw_povm_elements(&mut rng, joint, n_outcomes)? {
                drawn = Some(batch);
                break;
            }
        }
        drawn.ok_or_else(|| {
            CliError::Input(format!(
                "measurement normalizer stayed singular after {NORMALIZER_ATTEMPTS} attempts"
            ))
        })?
    };
    let outcomes: Vec<(HermitianMatrix, f64)> =
        elements.into_iter().map(|e| (e, rng.gen_range(-1.0..=1.0))).collect();
    let povm = Povm::new(outcomes)?;
    Ok(GameInstance::from_povm(&povm, qubits_a, qubits_b)?)
}

/// Embed a classical utility table with entries in [-1, 1], padding
/// each side up to a power of two with strictly dominated strategies:
/// `PAD_ROW_UTILITY` rows, `PAD_COL_UTILITY` columns, zero in the
/// shared corner.
pub fn gen_classical_embedding(table: &[Vec<f64>]) -> CliResult<GameInstance> {
    let rows = table.len();
    if rows == 0 || table[0].is_empty() {
        return Err(CliError::Input("empty utility table".into()));
    }
    let cols = table[0].len();
    for (i, row) in table.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::Input(format!(
                "table row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for &v in row {
            if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                return Err(CliError::Input(format!(
                    "table entry {v} at row {i} falls outside [-1, 1]"
                )));
            }
        }
    }
    let padded_rows = rows.next_power_of_two();
    let padded_cols = cols.next_power_of_two();
    let mut padded = Vec::with_capacity(padded_rows);
    for i in 0..padded_rows {
        let mut row = Vec::with_capacity(padded_cols);
        for j in 0..padded_cols {
            row.push(match (i < rows, j < cols) {
                (true, true) => table[i][j],
                (false, true) => PAD_ROW_UTILITY,
                (true, false) => PAD_COL_UTILITY,
                (false, false) => 0.0,
            });
        }
        padded.push(row);
    }
    Ok(GameInstance::classical_embedding(&padded)?)
}

/// Named 2x2 tables with completely mixed equilibria.
pub fn preset_table(name: &str) -> Option<Vec<Vec<f64>>> {
    let rows: [[f64; 2]; 2] = match name {
        "matching-pennies" => [[1.0, -1.0], [-1.0, 1.0]],
        "skew-pennies" => [[0.5, -0.5], [-1.0, 1.0]],
        "tilted-pennies" => [[0.8, -0.6], [-0.7, 0.9]],
        "half-pennies" => [[0.5, -0.5], [-0.5, 0.5]],
        "biased-corner" => [[1.0, -0.2], [-0.4, 0.6]],
        _ => return None,
    };
    Some(rows.iter().map(|r| r.to_vec()).collect())
}

pub fn preset_names() -> [&'static str; 5] {
    ["matching-pennies", "skew-pennies", "tilted-pennies", "half-pennies", "biased-corner"]
}

const INTERIOR_MARGIN: f64 = 1e-9;

/// Interior equilibrium of a 2x2 table under the row-minimizing
/// convention: row weights, column weights, and the game value, when
/// both players strictly mix. Saddle-point tables return `None`.
pub fn equilibrium_2x2(table: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    if table.len() != 2 || table[0].len() != 2 || table[1].len() != 2 {
        return None;
    }
    let (a, b) = (table[0][0], table[0][1]);
    let (c, d) = (table[1][0], table[1][1]);
    let delta = a - b - c + d;
    if delta.abs() < INTERIOR_MARGIN {
        return None;
    }
    let p = (d - c) / delta;
    let q = (d - b) / delta;
    let interior = |w: f64| w > INTERIOR_MARGIN && w < 1.0 - INTERIOR_MARGIN;
    if !interior(p) || !interior(q) {
        return None;
    }
    let value = a * q + b * (1.0 - q);
    Some((vec![p, 1.0 - p], vec![q, 1.0 - q], value))
}
