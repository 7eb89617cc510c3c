//! Complex Hermitian matrices and the small dense linear algebra the
//! solvers need: inner products, Kronecker products, partial traces, a
//! cyclic Jacobi eigensolver, an isometric real vectorization, and a
//! power-iteration operator norm for real map matrices.

use crate::error::{Error, Result};
use crate::num;
use crate::tol;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

/// Complex scalar used for all matrix entries.
pub type C64 = Complex<f64>;

/// Dense square complex matrix, row-major. Used for eigenvector bases and
/// a few intermediate products; no structure is assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "complex matrix product needs equal dims");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

/// Hermitian matrix. Construction symmetrizes `(A + A^dagger)/2`, so the
/// stored entries satisfy `A = A^dagger` exactly; inputs whose relative
/// asymmetry exceeds the construction tolerance are rejected instead.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Build from row-major entries, validating finiteness and Hermiticity.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyInput);
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        for e in &entries {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let mut norm_sq = 0.0;
        let mut asym_sq = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let a = entries[i * dim + j];
                norm_sq += a.norm_sqr();
                let d = a - entries[j * dim + i].conj();
                asym_sq += d.norm_sqr();
            }
        }
        let scale = num::sqrt(norm_sq).max(1.0);
        if num::sqrt(asym_sq) > tol::HERM_SYMMETRY_REL * scale {
            return Err(Error::NotHermitian { asymmetry: num::sqrt(asym_sq) / scale });
        }
        Ok(Self::symmetrized(dim, entries))
    }

    /// Build from an entry function; same validation as `from_entries`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::from_entries(dim, data)
    }

    /// Symmetrize unconditionally. For internal use where the entries are
    /// Hermitian by construction up to roundoff.
    pub(crate) fn symmetrized(dim: usize, mut data: Vec<C64>) -> Self {
        for i in 0..dim {
            data[i * dim + i] = C64::new(data[i * dim + i].re, 0.0);
            for j in (i + 1)..dim {
                let avg = 0.5 * (data[i * dim + j] + data[j * dim + i].conj());
                data[i * dim + j] = avg;
                data[j * dim + i] = avg.conj();
            }
        }
        HermitianMatrix { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(c, 0.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, v) in values.iter().enumerate() {
            m.data[i * dim + i] = C64::new(*v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        let mut t = 0.0;
        for i in 0..self.dim {
            t += self.data[i * self.dim + i].re;
        }
        t
    }

    pub fn frob_norm(&self) -> f64 {
        let mut s = 0.0;
        for e in &self.data {
            s += e.norm_sqr();
        }
        num::sqrt(s)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "hermitian add needs equal dims");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        HermitianMatrix { dim: self.dim, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "hermitian sub needs equal dims");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        HermitianMatrix { dim: self.dim, data }
    }

    pub fn scale(&self, c: f64) -> Self {
        let data = self.data.iter().map(|a| a * c).collect();
        HermitianMatrix { dim: self.dim, data }
    }

    /// `self + c * rhs`.
    pub fn add_scaled(&self, c: f64, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "hermitian add_scaled needs equal dims");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b * c).collect();
        HermitianMatrix { dim: self.dim, data }
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix { dim: self.dim, data: self.data.clone() }
    }
}

/// Hilbert-Schmidt inner product `tr(a^dagger b)`; real for Hermitian
/// operands.
pub fn frobenius_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    let mut acc = 0.0;
    for (x, y) in a.data.iter().zip(&b.data) {
        acc += (x.conj() * y).re;
    }
    Ok(acc)
}

/// Kronecker product with index order `(i,k),(j,l) -> a_ij * b_kl`, the
/// joint index being `i * b.dim + k`.
pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    let dim = a.dim.checked_mul(b.dim).ok_or(Error::DimensionCap {
        requested: usize::MAX,
        cap: tol::DIM_CAP,
    })?;
    if dim > tol::DIM_CAP {
        return Err(Error::DimensionCap { requested: dim, cap: tol::DIM_CAP });
    }
    let (da, db) = (a.dim, b.dim);
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..da {
        for j in 0..da {
            let aij = a.entry(i, j);
            for k in 0..db {
                for l in 0..db {
                    data[(i * db + k) * dim + (j * db + l)] = aij * b.entry(k, l);
                }
            }
        }
    }
    Ok(HermitianMatrix::symmetrized(dim, data))
}

/// Trace out the first tensor factor: `(Tr_A m)_{kl} = sum_i m_{(i,k),(i,l)}`.
pub fn partial_trace_first(m: &HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<HermitianMatrix> {
    if dim_a * dim_b != m.dim {
        return Err(Error::BadFactorization { dim: m.dim, dim_a, dim_b });
    }
    let d = m.dim;
    let mut data = vec![C64::new(0.0, 0.0); dim_b * dim_b];
    for k in 0..dim_b {
        for l in 0..dim_b {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim_a {
                acc += m.data[(i * dim_b + k) * d + (i * dim_b + l)];
            }
            data[k * dim_b + l] = acc;
        }
    }
    Ok(HermitianMatrix::symmetrized(dim_b, data))
}

/// Trace out the second tensor factor: `(Tr_B m)_{ij} = sum_k m_{(i,k),(j,k)}`.
pub fn partial_trace_second(m: &HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<HermitianMatrix> {
    if dim_a * dim_b != m.dim {
        return Err(Error::BadFactorization { dim: m.dim, dim_a, dim_b });
    }
    let d = m.dim;
    let mut data = vec![C64::new(0.0, 0.0); dim_a * dim_a];
    for i in 0..dim_a {
        for j in 0..dim_a {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim_b {
                acc += m.data[(i * dim_b + k) * d + (j * dim_b + k)];
            }
            data[i * dim_a + j] = acc;
        }
    }
    Ok(HermitianMatrix::symmetrized(dim_a, data))
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// Rebuild `V diag(values) V^dagger` for an arbitrary replacement
    /// spectrum; with `values = eigenvalues` this reconstructs the input.
    pub fn recombine(&self, values: &[f64]) -> HermitianMatrix {
        let d = self.eigenvectors.dim();
        assert_eq!(values.len(), d, "spectrum length must match dimension");
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            let lam = values[k];
            if lam == 0.0 {
                continue;
            }
            for i in 0..d {
                let vik = self.eigenvectors.get(i, k);
                if vik.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += vik * self.eigenvectors.get(j, k).conj() * lam;
                }
            }
        }
        HermitianMatrix::symmetrized(d, data)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.recombine(&self.eigenvalues)
    }
}

/// Full eigendecomposition via cyclic Jacobi sweeps with complex
/// rotations. Eigenvalues come back ascending.
pub fn eig(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim;
    let mut m = a.data.clone();
    let mut v = ComplexMatrix::identity(n);
    let stop = tol::EIG_OFFDIAG_REL * a.frob_norm().max(1.0);

    let off_norm = |m: &[C64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j].norm_sqr();
                }
            }
        }
        num::sqrt(s)
    };

    let mut converged = n <= 1;
    for _sweep in 0..tol::EIG_MAX_SWEEPS {
        if off_norm(&m) <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let mag = num::sqrt(apq.norm_sqr());
                if mag == 0.0 {
                    continue;
                }
                let u = apq / mag;
                let tau = (m[q * n + q].re - m[p * n + p].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + num::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + num::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / num::sqrt(1.0 + t * t);
                let s = t * c;
                // Columns p,q of both the working matrix and the basis pick
                // up the rotation W = [[c, s], [-conj(u) s, conj(u) c]].
                let w_pq = C64::new(s, 0.0);
                let w_qp = -u.conj() * s;
                let w_qq = u.conj() * c;
                for r in 0..n {
                    let mp = m[r * n + p];
                    let mq = m[r * n + q];
                    m[r * n + p] = mp * c + mq * w_qp;
                    m[r * n + q] = mp * w_pq + mq * w_qq;
                    let vp = v.get(r, p);
                    let vq = v.get(r, q);
                    v.set(r, p, vp * c + vq * w_qp);
                    v.set(r, q, vp * w_pq + vq * w_qq);
                }
                // Rows pick up W^dagger on the left.
                let wd_pq = -u * s;
                let wd_qp = C64::new(s, 0.0);
                let wd_qq = u * c;
                for r in 0..n {
                    let mp = m[p * n + r];
                    let mq = m[q * n + r];
                    m[p * n + r] = mp * c + mq * wd_pq;
                    m[q * n + r] = mp * wd_qp + mq * wd_qq;
                }
                m[p * n + q] = C64::new(0.0, 0.0);
                m[q * n + p] = C64::new(0.0, 0.0);
                m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
                m[q * n + q] = C64::new(m[q * n + q].re, 0.0);
            }
        }
    }
    if !converged && off_norm(&m) > stop {
        return Err(Error::EigDidNotConverge { offdiag: off_norm(&m) });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].re.partial_cmp(&m[j * n + j].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i * n + i].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors: vectors })
}

/// Smallest and largest eigenvalue, in that order.
pub fn lambda_extremes(a: &HermitianMatrix) -> Result<(f64, f64)> {
    let dec = eig(a)?;
    let lo = dec.eigenvalues[0];
    let hi = dec.eigenvalues[dec.eigenvalues.len() - 1];
    Ok((lo, hi))
}

/// Length of the real coordinate vector for Hermitian matrices of side `dim`.
pub fn vec_len(dim: usize) -> usize {
    dim * dim
}

/// Isometric real coordinates: diagonal entries first, then for each
/// strict upper-triangle position (row-major) sqrt(2) * Re and
/// sqrt(2) * Im. The Euclidean norm equals the Frobenius norm.
pub fn vectorize(a: &HermitianMatrix) -> Vec<f64> {
    let d = a.dim;
    let r2 = num::sqrt(2.0);
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(a.entry(i, i).re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let e = a.entry(i, j);
            out.push(r2 * e.re);
            out.push(r2 * e.im);
        }
    }
    out
}

/// Inverse of `vectorize`.
pub fn unvectorize(dim: usize, coords: &[f64]) -> Result<HermitianMatrix> {
    if coords.len() != vec_len(dim) {
        return Err(Error::DimensionMismatch { expected: vec_len(dim), found: coords.len() });
    }
    let inv_r2 = 1.0 / num::sqrt(2.0);
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        data[i * dim + i] = C64::new(coords[i], 0.0);
    }
    let mut pos = dim;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let e = C64::new(coords[pos] * inv_r2, coords[pos + 1] * inv_r2);
            pos += 2;
            data[i * dim + j] = e;
            data[j * dim + i] = e.conj();
        }
    }
    Ok(HermitianMatrix { dim, data })
}

/// Dense real matrix acting on vectorized Hermitian coordinates.
#[derive(Debug, Clone)]
pub struct LinearMapMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Largest singular value found by power iteration, with a convergence
/// flag and the number of matrix applications spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LinearMapMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        LinearMapMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "apply needs a length-cols vector");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            out[i] = acc;
        }
        out
    }

    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "apply_transpose needs a length-rows vector");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        out
    }

    /// Largest singular value via power iteration on the Gram map
    /// `v -> M^T (M v)`. The start vector is the normalized all-ones
    /// vector; if an iteration lands in the kernel the search restarts
    /// from the next standard basis vector, so the estimate is
    /// deterministic and covers the whole space.
    pub fn operator_norm(&self) -> NormEstimate {
        let norm_sq: f64 = self.data.iter().map(|x| x * x).sum();
        if norm_sq == 0.0 {
            return NormEstimate { value: 0.0, converged: true, iterations: 0 };
        }
        let n = self.cols;
        let mut best = 0.0_f64;
        let mut spent = 0usize;

        let mut start_index = 0usize;
        while start_index <= n {
            let mut v = if start_index == 0 {
                vec![1.0 / num::sqrt(n as f64); n]
            } else {
                let mut e = vec![0.0; n];
                e[start_index - 1] = 1.0;
                e
            };
            let mut sigma_prev = -1.0_f64;
            let mut streak = 0usize;
            let mut broke_down = false;
            let mut converged = false;
            while spent < tol::OPNORM_MAX_ITERS {
                spent += 1;
                let w = self.apply(&v);
                let sigma = num::sqrt(w.iter().map(|x| x * x).sum::<f64>());
                let u = self.apply_transpose(&w);
                let nu = num::sqrt(u.iter().map(|x| x * x).sum::<f64>());
                if nu <= 1e-300 {
                    best = best.max(sigma);
                    broke_down = true;
                    break;
                }
                for (vi, ui) in v.iter_mut().zip(&u) {
                    *vi = ui / nu;
                }
                if num::abs(sigma - sigma_prev) <= tol::OPNORM_REL * sigma.max(1.0) {
                    streak += 1;
                    if streak >= tol::OPNORM_STREAK {
                        best = best.max(sigma);
                        converged = true;
                        break;
                    }
                } else {
                    streak = 0;
                }
                sigma_prev = sigma;
            }
            if converged {
                return NormEstimate { value: best, converged: true, iterations: spent };
            }
            if !broke_down {
                // Budget ran out mid-iteration.
                best = best.max(sigma_prev.max(0.0));
                return NormEstimate { value: best, converged: false, iterations: spent };
            }
            start_index += 1;
        }
        NormEstimate { value: best, converged: true, iterations: spent }
    }
}
