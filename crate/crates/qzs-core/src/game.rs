//! Game instances: the payoff observable U, the superoperator pair
//! carrying each player's state to the opponent-facing gradient, the
//! payoff form, the joint gradient field, and the exact duality gap.
//!
//! Conventions, fixed once and enforced by the adjoint-identity tests:
//! the minimizing player holds `alpha`, the maximizing player `beta`,
//! the payoff is `tr(U (alpha x beta))`, and
//! `Phi(beta) = Tr_B[U (I x beta)]`, `Phi*(alpha) = Tr_A[U (alpha x I)]`,
//! so that `payoff = tr(alpha Phi(beta)) = tr(Phi*(alpha) beta)` holds
//! without correction terms.

use crate::error::{Error, Result};
use crate::herm::{
    frobenius_inner, lambda_extremes, unvectorize, vec_len, vectorize, HermitianMatrix,
    LinearMapMatrix, NormEstimate, C64,
};
use crate::spectraplex::{DensityMatrix, JointState};
use crate::tol;
use alloc::vec;
use alloc::vec::Vec;

/// Positive operator-valued measurement with a utility per outcome.
#[derive(Debug, Clone)]
pub struct Povm {
    outcomes: Vec<(HermitianMatrix, f64)>,
}

impl Povm {
    /// Validate element positivity, utility range, and completeness.
    pub fn new(outcomes: Vec<(HermitianMatrix, f64)>) -> Result<Self> {
        let first = outcomes.first().ok_or(Error::EmptyInput)?;
        let dim = first.0.dim();
        let mut sum = HermitianMatrix::zeros(dim);
        for (element, utility) in &outcomes {
            if element.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: element.dim() });
            }
            if !utility.is_finite() {
                return Err(Error::NonFinite);
            }
            if crate::num::abs(*utility) > 1.0 + tol::UTILITY_RANGE_SLACK {
                return Err(Error::UtilityOutOfRange { value: *utility });
            }
            let (lo, _) = lambda_extremes(element)?;
            if lo < -tol::PSD_SLACK {
                return Err(Error::NotPositive { min_eigenvalue: lo });
            }
            sum = sum.add(element);
        }
        let deviation = sum.sub(&HermitianMatrix::identity(dim)).frob_norm();
        if deviation > tol::POVM_COMPLETENESS {
            return Err(Error::IncompleteMeasurement { deviation });
        }
        Ok(Povm { outcomes })
    }

    pub fn outcomes(&self) -> &[(HermitianMatrix, f64)] {
        &self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].0.dim()
    }
}

/// Gradient pair `(d/d alpha, d/d beta)` of the payoff seen as a field on
/// the joint space; the beta block carries a minus sign so one projected
/// descent step serves both players.
#[derive(Debug, Clone)]
pub struct GradientPair {
    pub g_alpha: HermitianMatrix,
    pub g_beta: HermitianMatrix,
}

/// Immutable two-player zero-sum game over density matrices.
#[derive(Debug, Clone)]
pub struct GameInstance {
    qubits_a: u32,
    qubits_b: u32,
    observable: HermitianMatrix,
    field_norm: NormEstimate,
}

impl GameInstance {
    /// Build from an explicit payoff observable of dimension
    /// `2^qubits_a * 2^qubits_b`. The operator norm of the joint gradient
    /// field is computed here once and cached.
    pub fn from_observable(
        qubits_a: u32,
        qubits_b: u32,
        observable: HermitianMatrix,
    ) -> Result<Self> {
        let dim_a = 1usize
            .checked_shl(qubits_a)
            .filter(|d| *d <= tol::DIM_CAP)
            .ok_or(Error::DimensionCap { requested: usize::MAX, cap: tol::DIM_CAP })?;
        let dim_b = 1usize
            .checked_shl(qubits_b)
            .filter(|d| *d <= tol::DIM_CAP)
            .ok_or(Error::DimensionCap { requested: usize::MAX, cap: tol::DIM_CAP })?;
        let joint = dim_a
            .checked_mul(dim_b)
            .filter(|d| *d <= tol::DIM_CAP)
            .ok_or(Error::DimensionCap { requested: usize::MAX, cap: tol::DIM_CAP })?;
        if observable.dim() != joint {
            return Err(Error::DimensionMismatch { expected: joint, found: observable.dim() });
        }
        let field_norm = build_field_matrix(&observable, dim_a, dim_b).operator_norm();
        Ok(GameInstance { qubits_a, qubits_b, observable, field_norm })
    }

    /// Build the observable `U = sum_w u_w P_w` from a measurement and
    /// check the resulting operator norm stays within the utility range.
    pub fn from_povm(povm: &Povm, qubits_a: u32, qubits_b: u32) -> Result<Self> {
        let dim = povm.dim();
        let mut u = HermitianMatrix::zeros(dim);
        for (element, utility) in povm.outcomes() {
            u = u.add_scaled(*utility, element);
        }
        let game = Self::from_observable(qubits_a, qubits_b, u)?;
        let (lo, hi) = lambda_extremes(&game.observable)?;
        let spectral = crate::num::abs(lo).max(crate::num::abs(hi));
        if spectral > 1.0 + tol::GAP_NONNEG_SLACK {
            return Err(Error::UtilityOutOfRange { value: spectral });
        }
        Ok(game)
    }

    /// Embed a classical matrix game on the diagonal:
    /// `U = sum_ij u_ij |i><i| x |j><j|`. Row count and column count must
    /// be powers of two. Diagonal strategy pairs then reproduce the
    /// classical bilinear payoff exactly.
    pub fn classical_embedding(u: &[Vec<f64>]) -> Result<Self> {
        let rows = u.len();
        if rows == 0 {
            return Err(Error::EmptyInput);
        }
        let cols = u[0].len();
        if cols == 0 {
            return Err(Error::EmptyInput);
        }
        for row in u {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
            }
        }
        if !rows.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { value: rows });
        }
        if !cols.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { value: cols });
        }
        let mut diag = Vec::with_capacity(rows * cols);
        for row in u {
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                diag.push(v);
            }
        }
        Self::from_observable(
            rows.trailing_zeros(),
            cols.trailing_zeros(),
            HermitianMatrix::diagonal(&diag),
        )
    }

    pub fn qubits_a(&self) -> u32 {
        self.qubits_a
    }

    pub fn qubits_b(&self) -> u32 {
        self.qubits_b
    }

    pub fn dim_a(&self) -> usize {
        1 << self.qubits_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.qubits_b
    }

    pub fn observable(&self) -> &HermitianMatrix {
        &self.observable
    }

    /// Cached operator norm of the joint gradient field, with its
    /// convergence metadata.
    pub fn field_norm(&self) -> NormEstimate {
        self.field_norm
    }

    /// Linear extension of the first superoperator to arbitrary Hermitian
    /// input: `Phi(b)_{ij} = sum_{k,q} U_{(i,k),(j,q)} b_{qk}`.
    pub fn superop_linear(&self, b: &HermitianMatrix) -> Result<HermitianMatrix> {
        let (da, db) = (self.dim_a(), self.dim_b());
        if b.dim() != db {
            return Err(Error::DimensionMismatch { expected: db, found: b.dim() });
        }
        Ok(apply_forward(&self.observable, da, db, da * db, b))
    }

    /// Linear extension of the adjoint superoperator:
    /// `Phi*(a)_{kl} = sum_{i,p} U_{(i,k),(p,l)} a_{pi}`.
    pub fn superop_adjoint_linear(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        let (da, db) = (self.dim_a(), self.dim_b());
        if a.dim() != da {
            return Err(Error::DimensionMismatch { expected: da, found: a.dim() });
        }
        Ok(apply_adjoint(&self.observable, da, db, da * db, a))
    }

    /// `Phi(beta)`: the minimizer-facing gradient given the maximizer's
    /// state.
    pub fn superop(&self, beta: &DensityMatrix) -> Result<HermitianMatrix> {
        self.superop_linear(beta.matrix())
    }

    /// `Phi*(alpha)`: the maximizer-facing gradient given the minimizer's
    /// state.
    pub fn superop_adjoint(&self, alpha: &DensityMatrix) -> Result<HermitianMatrix> {
        self.superop_adjoint_linear(alpha.matrix())
    }

    /// Bilinear payoff extended to arbitrary Hermitian arguments.
    pub fn payoff_linear(&self, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
        frobenius_inner(a, &self.superop_linear(b)?)
    }

    /// Expected payoff `tr(U (alpha x beta))` to the minimizer.
    pub fn payoff(&self, z: &JointState) -> Result<f64> {
        self.payoff_linear(z.alpha().matrix(), z.beta().matrix())
    }

    /// Joint gradient field `F(z) = (Phi(beta), -Phi*(alpha))`.
    pub fn gradient_field(&self, z: &JointState) -> Result<GradientPair> {
        Ok(GradientPair {
            g_alpha: self.superop(z.beta())?,
            g_beta: self.superop_adjoint(z.alpha())?.scale(-1.0),
        })
    }

    /// Best payoff the maximizer can still reach against `alpha`.
    pub fn upper_value(&self, alpha: &DensityMatrix) -> Result<f64> {
        let (_, hi) = lambda_extremes(&self.superop_adjoint(alpha)?)?;
        Ok(hi)
    }

    /// Worst payoff the minimizer can still force against `beta`.
    pub fn lower_value(&self, beta: &DensityMatrix) -> Result<f64> {
        let (lo, _) = lambda_extremes(&self.superop(beta)?)?;
        Ok(lo)
    }

    /// Exact duality gap: the spread between the maximizer's best
    /// response value and the minimizer's best response value. Zero
    /// exactly at equilibrium, nonnegative everywhere (up to roundoff).
    pub fn duality_gap(&self, z: &JointState) -> Result<f64> {
        Ok(self.upper_value(z.alpha())? - self.lower_value(z.beta())?)
    }

    /// The joint gradient field as an explicit real matrix on vectorized
    /// coordinates (alpha block first). Rebuilt on demand; the cached
    /// norm in `field_norm` came from this same construction.
    pub fn field_matrix(&self) -> LinearMapMatrix {
        build_field_matrix(&self.observable, self.dim_a(), self.dim_b())
    }
}

/// Assemble the block matrix `[[0, M_Phi], [-M_Phi*, 0]]` acting on the
/// concatenated isometric coordinates of (alpha, beta).
fn build_field_matrix(observable: &HermitianMatrix, dim_a: usize, dim_b: usize) -> LinearMapMatrix {
    let na = vec_len(dim_a);
    let nb = vec_len(dim_b);
    let joint = dim_a * dim_b;
    let mut m = LinearMapMatrix::zeros(na + nb, na + nb);

    let superop_cols = |input_dim: usize, adjoint: bool| -> Vec<Vec<f64>> {
        let n_in = vec_len(input_dim);
        let mut cols = Vec::with_capacity(n_in);
        for c in 0..n_in {
            let mut e = vec![0.0; n_in];
            e[c] = 1.0;
            let basis = unvectorize(input_dim, &e).expect("basis coordinates are well-formed");
            let out = if adjoint {
                apply_adjoint(observable, dim_a, dim_b, joint, &basis)
            } else {
                apply_forward(observable, dim_a, dim_b, joint, &basis)
            };
            cols.push(vectorize(&out));
        }
        cols
    };

    for (c, col) in superop_cols(dim_b, false).into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            m.set(r, na + c, v);
        }
    }
    for (c, col) in superop_cols(dim_a, true).into_iter().enumerate() {
        for (r, v) in col.into_iter().enumerate() {
            m.set(na + r, c, -v);
        }
    }
    m
}

fn apply_forward(
    u: &HermitianMatrix,
    da: usize,
    db: usize,
    joint: usize,
    b: &HermitianMatrix,
) -> HermitianMatrix {
    let mut data = vec![C64::new(0.0, 0.0); da * da];
    for i in 0..da {
        for j in 0..da {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..db {
                let row = (i * db + k) * joint + j * db;
                for q in 0..db {
                    acc += u.entries()[row + q] * b.entry(q, k);
                }
            }
            data[i * da + j] = acc;
        }
    }
    HermitianMatrix::symmetrized(da, data)
}

fn apply_adjoint(
    u: &HermitianMatrix,
    da: usize,
    db: usize,
    joint: usize,
    a: &HermitianMatrix,
) -> HermitianMatrix {
    let mut data = vec![C64::new(0.0, 0.0); db * db];
    for k in 0..db {
        for l in 0..db {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..da {
                let row = (i * db + k) * joint + l;
                for p in 0..da {
                    acc += u.entries()[row + p * db] * a.entry(p, i);
                }
            }
            data[k * db + l] = acc;
        }
    }
    HermitianMatrix::symmetrized(db, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::{eig, kron, partial_trace_second, ComplexMatrix};
    use crate::spectraplex::project_spectraplex;
    use crate::testutil::{mp_embedding, rand_density, rand_herm, rand_joint};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Dense route for `Phi(b)`: form `U (I x b)` as full complex
    /// matrices and partially trace the second factor by index summation.
    fn dense_superop(g: &GameInstance, b: &HermitianMatrix) -> HermitianMatrix {
        let (da, db) = (g.dim_a(), g.dim_b());
        let prod = g
            .observable()
            .to_complex()
            .mul(&kron(&HermitianMatrix::identity(da), b).unwrap().to_complex());
        complex_trace_second(&prod, da, db)
    }

    fn dense_adjoint(g: &GameInstance, a: &HermitianMatrix) -> HermitianMatrix {
        let (da, db) = (g.dim_a(), g.dim_b());
        let prod = g
            .observable()
            .to_complex()
            .mul(&kron(a, &HermitianMatrix::identity(db)).unwrap().to_complex());
        complex_trace_first(&prod, da, db)
    }

    fn complex_trace_second(m: &ComplexMatrix, da: usize, db: usize) -> HermitianMatrix {
        let mut data = alloc::vec![C64::new(0.0, 0.0); da * da];
        for i in 0..da {
            for j in 0..da {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..db {
                    acc += m.get(i * db + k, j * db + k);
                }
                data[i * da + j] = acc;
            }
        }
        HermitianMatrix::from_entries(da, data).expect("partial trace of this product is Hermitian")
    }

    fn complex_trace_first(m: &ComplexMatrix, da: usize, db: usize) -> HermitianMatrix {
        let mut data = alloc::vec![C64::new(0.0, 0.0); db * db];
        for k in 0..db {
            for l in 0..db {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..da {
                    acc += m.get(i * db + k, i * db + l);
                }
                data[k * db + l] = acc;
            }
        }
        HermitianMatrix::from_entries(db, data).expect("partial trace of this product is Hermitian")
    }

    /// Random measurement: squares of random Hermitian matrices,
    /// conjugated by the inverse square root of their sum.
    fn rand_povm(rng: &mut StdRng, dim: usize, outcomes: usize) -> Povm {
        loop {
            let elements: Vec<HermitianMatrix> = (0..outcomes)
                .map(|_| {
                    let h = rand_herm(rng, dim);
                    let dec = eig(&h).unwrap();
                    let sq: Vec<f64> = dec.eigenvalues.iter().map(|l| l * l + 1e-6).collect();
                    dec.recombine(&sq)
                })
                .collect();
            let mut total = HermitianMatrix::zeros(dim);
            for e in &elements {
                total = total.add(e);
            }
            let dec = eig(&total).unwrap();
            if dec.eigenvalues[0] <= 1e-9 {
                continue;
            }
            let inv_sqrt: Vec<f64> = dec.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
            let s = dec.recombine(&inv_sqrt).to_complex();
            let outcomes: Vec<(HermitianMatrix, f64)> = elements
                .iter()
                .map(|e| {
                    let conj = s.mul(&e.to_complex()).mul(&s);
                    let m = HermitianMatrix::from_entries(
                        dim,
                        (0..dim * dim)
                            .map(|idx| conj.get(idx / dim, idx % dim))
                            .collect(),
                    )
                    .unwrap();
                    (m, rng.gen_range(-1.0..1.0))
                })
                .collect();
            return Povm::new(outcomes).unwrap();
        }
    }

    #[test]
    fn povm_validation() {
        let i2 = HermitianMatrix::identity(2);
        assert!(Povm::new(alloc::vec![(i2.clone(), 0.3)]).is_ok());
        assert!(matches!(
            Povm::new(alloc::vec![(i2.clone(), 1.5)]),
            Err(Error::UtilityOutOfRange { .. })
        ));
        assert!(matches!(
            Povm::new(alloc::vec![(i2.scale(0.7), 0.3)]),
            Err(Error::IncompleteMeasurement { .. })
        ));
        assert!(matches!(
            Povm::new(alloc::vec![
                (HermitianMatrix::diagonal(&[2.0, 1.0]), 0.3),
                (HermitianMatrix::diagonal(&[-1.0, 0.0]), 0.3),
            ]),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn povm_built_observables() {
        let i4 = HermitianMatrix::identity(4);
        let single = Povm::new(alloc::vec![(i4.clone(), 0.25)]).unwrap();
        let g = GameInstance::from_povm(&single, 1, 1).unwrap();
        assert!(g.observable().sub(&i4.scale(0.25)).frob_norm() < 1e-12);

        let p = HermitianMatrix::diagonal(&[1.0, 1.0, 0.0, 0.0]);
        let two = Povm::new(alloc::vec![(p.clone(), 1.0), (i4.sub(&p), -1.0)]).unwrap();
        let g = GameInstance::from_povm(&two, 1, 1).unwrap();
        let expect = p.scale(2.0).sub(&i4);
        assert!(g.observable().sub(&expect).frob_norm() < 1e-12);

        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..20 {
            let povm = rand_povm(&mut rng, 4, 4);
            let g = GameInstance::from_povm(&povm, 1, 1).unwrap();
            let (lo, hi) = lambda_extremes(g.observable()).unwrap();
            assert!(lo.abs().max(hi.abs()) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn superop_on_identity_observable() {
        let g = GameInstance::from_observable(1, 1, HermitianMatrix::identity(4)).unwrap();
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..20 {
            let beta = rand_density(&mut rng, 2);
            let phi = g.superop(&beta).unwrap();
            assert!(phi.sub(&HermitianMatrix::identity(2)).frob_norm() < 1e-10);
            let alpha = rand_density(&mut rng, 2);
            let adj = g.superop_adjoint(&alpha).unwrap();
            assert!(adj.sub(&HermitianMatrix::identity(2)).frob_norm() < 1e-10);
        }
    }

    #[test]
    fn superop_on_product_observable() {
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..50 {
            let a = rand_herm(&mut rng, 2);
            let b = rand_herm(&mut rng, 4);
            let u = kron(&a, &b).unwrap();
            let g = GameInstance::from_observable(1, 2, u).unwrap();
            let beta = rand_density(&mut rng, 4);
            let phi = g.superop(&beta).unwrap();
            let scale = frobenius_inner(&b, beta.matrix()).unwrap();
            assert!(phi.sub(&a.scale(scale)).frob_norm() <= 1e-10 * phi.frob_norm().max(1.0));
        }
    }

    #[test]
    fn superop_matches_dense_route() {
        let mut rng = StdRng::seed_from_u64(44);
        for _ in 0..200 {
            let u = rand_herm(&mut rng, 8);
            let g = GameInstance::from_observable(1, 2, u).unwrap();
            let beta = rand_density(&mut rng, 4);
            let ours = g.superop(&beta).unwrap();
            let dense = dense_superop(&g, beta.matrix());
            assert!(ours.sub(&dense).frob_norm() <= 1e-10 * dense.frob_norm().max(1.0));
            let alpha = rand_density(&mut rng, 2);
            let ours = g.superop_adjoint(&alpha).unwrap();
            let dense = dense_adjoint(&g, alpha.matrix());
            assert!(ours.sub(&dense).frob_norm() <= 1e-10 * dense.frob_norm().max(1.0));
        }
    }

    #[test]
    fn superop_diagonal_embedding_formula() {
        let u = alloc::vec![alloc::vec![0.3, -0.7], alloc::vec![0.9, 0.1]];
        let g = GameInstance::classical_embedding(&u).unwrap();
        let mut rng = StdRng::seed_from_u64(45);
        for _ in 0..20 {
            let beta = rand_density(&mut rng, 2);
            let phi = g.superop(&beta).unwrap();
            for i in 0..2 {
                let oracle: f64 =
                    (0..2).map(|j| u[i][j] * beta.matrix().entry(j, j).re).sum();
                assert!((phi.entry(i, i).re - oracle).abs() < 1e-12);
            }
            let alpha = rand_density(&mut rng, 2);
            let adj = g.superop_adjoint(&alpha).unwrap();
            for j in 0..2 {
                let oracle: f64 =
                    (0..2).map(|i| u[i][j] * alpha.matrix().entry(i, i).re).sum();
                assert!((adj.entry(j, j).re - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn payoff_routes_agree() {
        let mut rng = StdRng::seed_from_u64(46);
        for _ in 0..200 {
            let u = rand_herm(&mut rng, 8);
            let g = GameInstance::from_observable(2, 1, u).unwrap();
            let z = rand_joint(&mut rng, 4, 2);
            let via_phi = g.payoff(&z).unwrap();
            let joint = kron(z.alpha().matrix(), z.beta().matrix()).unwrap();
            let via_trace = frobenius_inner(g.observable(), &joint).unwrap();
            assert!((via_phi - via_trace).abs() <= 1e-10 * via_trace.abs().max(1.0));
        }
    }

    #[test]
    fn payoff_on_povm_game_is_a_utility_mixture() {
        let mut rng = StdRng::seed_from_u64(47);
        let povm = rand_povm(&mut rng, 4, 3);
        let g = GameInstance::from_povm(&povm, 1, 1).unwrap();
        for _ in 0..50 {
            let z = rand_joint(&mut rng, 2, 2);
            let joint = kron(z.alpha().matrix(), z.beta().matrix()).unwrap();
            let mut total_p = 0.0;
            let mut mixture = 0.0;
            for (element, utility) in povm.outcomes() {
                let p = frobenius_inner(element, &joint).unwrap();
                assert!(p >= -1e-9);
                total_p += p;
                mixture += utility * p;
            }
            assert!((total_p - 1.0).abs() <= 1e-9);
            assert!((g.payoff(&z).unwrap() - mixture).abs() <= 1e-10);
        }
    }

    #[test]
    fn payoff_matches_classical_bilinear_form() {
        let u = alloc::vec![alloc::vec![0.2, -0.4], alloc::vec![0.8, 0.5]];
        let g = GameInstance::classical_embedding(&u).unwrap();
        let mut rng = StdRng::seed_from_u64(48);
        for _ in 0..50 {
            let x: f64 = rng.gen_range(0.0..1.0);
            let y: f64 = rng.gen_range(0.0..1.0);
            let alpha = DensityMatrix::new(HermitianMatrix::diagonal(&[x, 1.0 - x])).unwrap();
            let beta = DensityMatrix::new(HermitianMatrix::diagonal(&[y, 1.0 - y])).unwrap();
            let z = JointState::new(alpha, beta);
            let classical = x * (u[0][0] * y + u[0][1] * (1.0 - y))
                + (1.0 - x) * (u[1][0] * y + u[1][1] * (1.0 - y));
            assert!((g.payoff(&z).unwrap() - classical).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_identity_holds() {
        let mut rng = StdRng::seed_from_u64(49);
        for trial in 0..1000 {
            let (qa, qb) = if trial % 2 == 0 { (1, 1) } else { (1, 2) };
            let u = rand_herm(&mut rng, 1 << (qa + qb));
            let g = GameInstance::from_observable(qa, qb, u).unwrap();
            let z = rand_joint(&mut rng, 1 << qa, 1 << qb);
            let lhs = frobenius_inner(z.alpha().matrix(), &g.superop(z.beta()).unwrap()).unwrap();
            let rhs =
                frobenius_inner(&g.superop_adjoint(z.alpha()).unwrap(), z.beta().matrix()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn gradient_field_identity_observable_and_fd() {
        let g = GameInstance::from_observable(1, 1, HermitianMatrix::identity(4)).unwrap();
        let z = JointState::maximally_mixed(2, 2);
        let f = g.gradient_field(&z).unwrap();
        assert!(f.g_alpha.sub(&HermitianMatrix::identity(2)).frob_norm() < 1e-12);
        assert!(f.g_beta.add(&HermitianMatrix::identity(2)).frob_norm() < 1e-12);

        let mut rng = StdRng::seed_from_u64(50);
        for _ in 0..50 {
            let u = rand_herm(&mut rng, 4);
            let g = GameInstance::from_observable(1, 1, u).unwrap();
            let z = rand_joint(&mut rng, 2, 2);
            let f = g.gradient_field(&z).unwrap();
            let da = rand_herm(&mut rng, 2);
            let db = rand_herm(&mut rng, 2);
            let h = 1e-5;
            let plus = g
                .payoff_linear(
                    &z.alpha().matrix().add_scaled(h, &da),
                    &z.beta().matrix().add_scaled(h, &db),
                )
                .unwrap();
            let minus = g
                .payoff_linear(
                    &z.alpha().matrix().add_scaled(-h, &da),
                    &z.beta().matrix().add_scaled(-h, &db),
                )
                .unwrap();
            let fd = (plus - minus) / (2.0 * h);
            let analytic = frobenius_inner(&f.g_alpha, &da).unwrap()
                - frobenius_inner(&f.g_beta, &db).unwrap();
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
                "fd {fd} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn gradient_field_is_a_null_monotone_operator() {
        let mut rng = StdRng::seed_from_u64(51);
        for _ in 0..100 {
            let u = rand_herm(&mut rng, 8);
            let g = GameInstance::from_observable(1, 2, u).unwrap();
            let z1 = rand_joint(&mut rng, 2, 4);
            let z2 = rand_joint(&mut rng, 2, 4);
            let f1 = g.gradient_field(&z1).unwrap();
            let f2 = g.gradient_field(&z2).unwrap();
            let da = z1.alpha().matrix().sub(z2.alpha().matrix());
            let db = z1.beta().matrix().sub(z2.beta().matrix());
            let inner = frobenius_inner(&f1.g_alpha.sub(&f2.g_alpha), &da).unwrap()
                + frobenius_inner(&f1.g_beta.sub(&f2.g_beta), &db).unwrap();
            assert!(inner.abs() <= 1e-10, "pairing {inner}");
        }
    }

    #[test]
    fn duality_gap_hand_values() {
        let g = GameInstance::from_observable(1, 1, HermitianMatrix::identity(4)).unwrap();
        let mut rng = StdRng::seed_from_u64(52);
        for _ in 0..10 {
            let z = rand_joint(&mut rng, 2, 2);
            assert!(g.duality_gap(&z).unwrap().abs() <= 1e-10);
        }

        let mp = mp_embedding();
        let uniform = JointState::maximally_mixed(2, 2);
        assert!(mp.duality_gap(&uniform).unwrap().abs() <= 1e-10);
        let corner = JointState::new(DensityMatrix::pure_basis(2, 0), DensityMatrix::pure_basis(2, 0));
        assert!((mp.duality_gap(&corner).unwrap() - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn duality_gap_nonnegative_on_random_states() {
        let mut rng = StdRng::seed_from_u64(53);
        for _ in 0..200 {
            let u = rand_herm(&mut rng, 4);
            let g = GameInstance::from_observable(1, 1, u).unwrap();
            let z = rand_joint(&mut rng, 2, 2);
            assert!(g.duality_gap(&z).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn embedded_equilibrium_has_zero_gap() {
        // Row 0 dominates for the minimizer; the maximizer answers with
        // column 0, so (0, 0) is a pure saddle at value 0.4.
        let g = GameInstance::classical_embedding(&alloc::vec![
            alloc::vec![0.4, 0.2],
            alloc::vec![0.6, 0.8],
        ])
        .unwrap();
        let z = JointState::new(DensityMatrix::pure_basis(2, 0), DensityMatrix::pure_basis(2, 0));
        assert!(g.duality_gap(&z).unwrap() <= 1e-8);
    }

    #[test]
    fn field_norm_hand_values_and_svd_oracle() {
        let g = GameInstance::from_observable(1, 1, HermitianMatrix::identity(4)).unwrap();
        assert!(g.field_norm().converged);
        assert!((g.field_norm().value - 2.0).abs() <= 1e-8);

        let zero = GameInstance::from_observable(1, 1, HermitianMatrix::zeros(4)).unwrap();
        assert_eq!(zero.field_norm().value, 0.0);

        let mut rng = StdRng::seed_from_u64(54);
        for _ in 0..20 {
            let u = rand_herm(&mut rng, 4);
            let g = GameInstance::from_observable(1, 1, u.clone()).unwrap();
            let fm = g.field_matrix();
            let na = nalgebra::DMatrix::from_fn(fm.rows(), fm.cols(), |i, j| fm.get(i, j));
            let sv = na.svd(false, false).singular_values;
            let oracle = sv.iter().fold(0.0_f64, |acc, &s| acc.max(s));
            assert!((g.field_norm().value - oracle).abs() <= 1e-8 * oracle.max(1.0));

            let c: f64 = rng.gen_range(-3.0..3.0);
            let scaled = GameInstance::from_observable(1, 1, u.scale(c)).unwrap();
            assert!(
                (scaled.field_norm().value - c.abs() * g.field_norm().value).abs()
                    <= 1e-9 * g.field_norm().value.max(1.0)
            );
        }
    }

    #[test]
    fn matching_pennies_field_norm_is_two() {
        let mp = mp_embedding();
        assert!((mp.field_norm().value - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn dimension_checks() {
        assert!(matches!(
            GameInstance::from_observable(1, 1, HermitianMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let g = GameInstance::from_observable(1, 1, HermitianMatrix::identity(4)).unwrap();
        let wrong = DensityMatrix::maximally_mixed(3);
        assert!(g.superop(&wrong).is_err());
        assert!(matches!(
            GameInstance::classical_embedding(&alloc::vec![alloc::vec![1.0, 2.0, 3.0]]),
            Err(Error::NotPowerOfTwo { .. })
        ));
    }

    #[test]
    fn projection_composes_with_game_dimensions() {
        let mut rng = StdRng::seed_from_u64(55);
        let g = GameInstance::from_observable(1, 2, rand_herm(&mut rng, 8)).unwrap();
        let raw_a = rand_herm(&mut rng, g.dim_a());
        let raw_b = rand_herm(&mut rng, g.dim_b());
        let z = JointState::new(
            project_spectraplex(&raw_a).unwrap(),
            project_spectraplex(&raw_b).unwrap(),
        );
        assert!(g.duality_gap(&z).unwrap().is_finite());
        let _ = partial_trace_second(g.observable(), g.dim_a(), g.dim_b()).unwrap();
    }
}
