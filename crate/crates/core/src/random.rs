//! Seeded random states for property checks and the validation suite.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{DensityMatrix, StateVector};
use crate::scalar::{Cplx, Real};

/// Deterministic generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Real, R: Rng>(rng: &mut R) -> Cplx<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cplx::new(T::lit(re), T::lit(im))
}

/// Haar-random pure state.
pub fn random_state<T: Real, R: Rng>(dim: usize, rng: &mut R) -> StateVector<T> {
    let a = (0..dim).map(|_| gaussian(rng)).collect();
    StateVector::normalized(a).expect("Gaussian vector is nonzero with probability one")
}

/// Random density matrix `G G* / tr(G G*)` with a `dim x rank` Gaussian `G`.
pub fn random_density_matrix<T: Real, R: Rng>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix<T> {
    let rank = rank.clamp(1, dim);
    let g: Vec<Cplx<T>> = (0..dim * rank).map(|_| gaussian(rng)).collect();
    let mut entries = vec![Cplx::new(T::zero(), T::zero()); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Cplx::new(T::zero(), T::zero());
            for k in 0..rank {
                acc += g[i * rank + k] * g[j * rank + k].conj();
            }
            entries[i * dim + j] = acc;
        }
    }
    let trace: T = (0..dim).map(|i| entries[i * dim + i].re).sum();
    for z in &mut entries {
        *z = *z / trace;
    }
    DensityMatrix::new(dim, entries).expect("normalized Gram matrix is a valid state")
}
