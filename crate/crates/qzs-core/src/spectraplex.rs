//! Density matrices, joint strategy pairs, and Euclidean projection onto
//! the spectraplex via spectral reduction to a simplex projection.

use crate::error::{Error, Result};
use crate::herm::{eig, HermitianMatrix};
use crate::num;
use crate::tol;
use alloc::vec::Vec;

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: HermitianMatrix,
}

impl DensityMatrix {
    /// Validate trace and positive semidefiniteness, then wrap.
    pub fn new(mat: HermitianMatrix) -> Result<Self> {
        let tr = mat.trace();
        if num::abs(tr - 1.0) > tol::TRACE_SLACK {
            return Err(Error::TraceNotOne { trace: tr });
        }
        let (lo, _) = crate::herm::lambda_extremes(&mat)?;
        if lo < -tol::PSD_SLACK {
            return Err(Error::NotPositive { min_eigenvalue: lo });
        }
        Ok(DensityMatrix { mat })
    }

    /// Wrap without re-running the spectral check. For outputs that are
    /// feasible by construction (projections, convex combinations).
    pub(crate) fn trusted(mat: HermitianMatrix) -> Self {
        debug_assert!(num::abs(mat.trace() - 1.0) <= 1e-6);
        DensityMatrix { mat }
    }

    /// The maximally mixed state `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix { mat: HermitianMatrix::scaled_identity(dim, 1.0 / dim as f64) }
    }

    /// The pure basis state `|k><k|`.
    pub fn pure_basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut vals = alloc::vec![0.0; dim];
        vals[k] = 1.0;
        DensityMatrix { mat: HermitianMatrix::diagonal(&vals) }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.mat
    }
}

/// Strategy pair `(alpha, beta)`, one density matrix per player.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    alpha: DensityMatrix,
    beta: DensityMatrix,
}

impl JointState {
    pub fn new(alpha: DensityMatrix, beta: DensityMatrix) -> Self {
        JointState { alpha, beta }
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        JointState {
            alpha: DensityMatrix::maximally_mixed(dim_a),
            beta: DensityMatrix::maximally_mixed(dim_b),
        }
    }

    pub fn alpha(&self) -> &DensityMatrix {
        &self.alpha
    }

    pub fn beta(&self) -> &DensityMatrix {
        &self.beta
    }

    /// `t * self + (1 - t) * other`, entrywise on both components. The
    /// spectraplex is convex, so the result needs no re-validation.
    pub fn convex_combination(&self, other: &JointState, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParameterOutOfRange { name: "t", value: t });
        }
        if self.alpha.dim() != other.alpha.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.alpha.dim(),
                found: other.alpha.dim(),
            });
        }
        if self.beta.dim() != other.beta.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.beta.dim(),
                found: other.beta.dim(),
            });
        }
        let s = 1.0 - t;
        let a = self.alpha.matrix().scale(t).add_scaled(s, other.alpha.matrix());
        let b = self.beta.matrix().scale(t).add_scaled(s, other.beta.matrix());
        Ok(JointState { alpha: DensityMatrix::trusted(a), beta: DensityMatrix::trusted(b) })
    }
}

/// Euclidean projection onto the probability simplex by sort and
/// threshold: sort descending, find the largest prefix whose shifted
/// entries stay positive, subtract the prefix threshold, clip at zero.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyInput);
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        }
    }
    Ok(v.iter().map(|&x| (x - theta).max(0.0)).collect())
}

/// Frobenius-nearest density matrix: project the spectrum onto the
/// simplex and recombine in the same eigenbasis.
pub fn project_spectraplex(x: &HermitianMatrix) -> Result<DensityMatrix> {
    let dec = eig(x)?;
    let lam = project_simplex(&dec.eigenvalues)?;
    Ok(DensityMatrix::trusted(dec.recombine(&lam)))
}

/// Componentwise projection onto the joint strategy space.
pub fn project_joint(a_raw: &HermitianMatrix, b_raw: &HermitianMatrix) -> Result<JointState> {
    Ok(JointState::new(project_spectraplex(a_raw)?, project_spectraplex(b_raw)?))
}

/// Frobenius distance on the joint space:
/// `sqrt(|alpha1 - alpha2|_F^2 + |beta1 - beta2|_F^2)`.
pub fn joint_distance(z1: &JointState, z2: &JointState) -> Result<f64> {
    if z1.alpha().dim() != z2.alpha().dim() {
        return Err(Error::DimensionMismatch { expected: z1.alpha().dim(), found: z2.alpha().dim() });
    }
    if z1.beta().dim() != z2.beta().dim() {
        return Err(Error::DimensionMismatch { expected: z1.beta().dim(), found: z2.beta().dim() });
    }
    let da = z1.alpha().matrix().sub(z2.alpha().matrix()).frob_norm();
    let db = z1.beta().matrix().sub(z2.beta().matrix()).frob_norm();
    Ok(num::sqrt(da * da + db * db))
}
