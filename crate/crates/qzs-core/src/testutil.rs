//! Shared random generators for unit tests.
//!
//! Densities are built from eigendecompositions of random Hermitian
//! matrices rather than through `project_spectraplex`, so projection
//! bugs cannot leak into fixtures that other modules rely on.

use rand::Rng;

use crate::game::GameInstance;
use crate::herm::{eig, C64, HermitianMatrix};
use crate::spectraplex::{DensityMatrix, JointState};

/// Random Hermitian matrix with entries of magnitude around one.
pub(crate) fn rand_herm<R: Rng>(rng: &mut R, dim: usize) -> HermitianMatrix {
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        data[i * dim + i] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..dim {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            data[i * dim + j] = z;
            data[j * dim + i] = z.conj();
        }
    }
    HermitianMatrix::from_entries(dim, data).expect("mirrored entries are Hermitian")
}

/// Random full-rank density matrix: square the spectrum of a random
/// Hermitian matrix, lift it off zero, and normalize the trace.
pub(crate) fn rand_density<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let decomp = eig(&rand_herm(rng, dim)).expect("random Hermitian decomposes");
    let lifted: Vec<f64> = decomp.eigenvalues.iter().map(|l| l * l + 1e-3).collect();
    let total: f64 = lifted.iter().sum();
    let scaled: Vec<f64> = lifted.iter().map(|l| l / total).collect();
    DensityMatrix::new(decomp.recombine(&scaled)).expect("normalized PSD spectrum")
}

/// Random joint strategy at the given per-player dimensions.
pub(crate) fn rand_joint<R: Rng>(rng: &mut R, dim_a: usize, dim_b: usize) -> JointState {
    JointState::new(rand_density(rng, dim_a), rand_density(rng, dim_b))
}

/// Matching pennies embedded as a diagonal observable on one qubit a side.
pub(crate) fn mp_embedding() -> GameInstance {
    GameInstance::classical_embedding(&[vec![1.0, -1.0], vec![-1.0, 1.0]])
        .expect("two by two table embeds")
}
