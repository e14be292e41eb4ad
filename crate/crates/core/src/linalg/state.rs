use num_traits::Zero;

use super::operator::HermitianOperator;
use crate::error::{QfiError, Result};
use crate::scalar::{Cplx, Real};

/// Unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: Vec<Cplx<T>>,
}

fn state_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1024.0))
}

impl<T: Real> StateVector<T> {
    /// Wraps amplitudes that must already have unit norm (within 1e-10).
    pub fn new(amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QfiError::InvalidInput("state must have positive dimension".into()));
        }
        let norm2: T = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - T::one()).abs() > state_tolerance::<T>() {
            return Err(QfiError::InvalidInput(format!(
                "state norm squared is {norm2}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Cplx<T>>) -> Result<Self> {
        let norm: T = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm.is_finite() && norm > T::zero()) {
            return Err(QfiError::InvalidInput("cannot normalize a zero or non-finite vector".into()));
        }
        for z in &mut amplitudes {
            *z = *z / norm;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(QfiError::InvalidInput(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut a = vec![Cplx::zero(); dim];
        a[index] = Cplx::new(T::one(), T::zero());
        Ok(Self { amplitudes: a })
    }

    pub(crate) fn from_raw_unchecked(amplitudes: Vec<Cplx<T>>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Cplx<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Cplx<T>> {
        self.amplitudes
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Cplx<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }
}

/// Positive semidefinite, unit-trace density operator stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    dim: usize,
    entries: Vec<Cplx<T>>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates self-adjointness, unit trace and positivity (eigenvalues >= -1e-10).
    pub fn new(dim: usize, entries: Vec<Cplx<T>>) -> Result<Self> {
        let op = HermitianOperator::from_dense(dim, entries)?;
        let tol = state_tolerance::<T>();
        let trace = op.trace();
        if (trace - T::one()).abs() > tol {
            return Err(QfiError::InvalidInput(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let (values, _) = super::eig_full(&op)?;
        if values[0] < -tol {
            return Err(QfiError::InvalidInput(format!(
                "density matrix has negative eigenvalue {}",
                values[0]
            )));
        }
        Ok(Self {
            dim,
            entries: op.to_dense(),
        })
    }

    pub fn from_pure(state: &StateVector<T>) -> Self {
        let a = state.amplitudes();
        let n = a.len();
        let mut entries = vec![Cplx::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = a[i] * a[j].conj();
            }
        }
        Self { dim: n, entries }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut entries = vec![Cplx::zero(); dim * dim];
        let p = T::one() / T::from_usize_lossy(dim);
        for i in 0..dim {
            entries[i * dim + i] = Cplx::new(p, T::zero());
        }
        Self { dim, entries }
    }

    /// Convex combination of states; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(QfiError::InvalidInput("empty mixture".into()));
        };
        let dim = first.dim;
        let total: T = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < T::zero())
            || (total - T::one()).abs() > state_tolerance::<T>()
        {
            return Err(QfiError::InvalidInput("mixture weights must be a probability vector".into()));
        }
        let mut entries = vec![Cplx::zero(); dim * dim];
        for (w, rho) in parts {
            if rho.dim != dim {
                return Err(QfiError::DimensionMismatch {
                    expected: dim,
                    found: rho.dim,
                });
            }
            for (e, r) in entries.iter_mut().zip(&rho.entries) {
                *e += *r * *w;
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Cplx<T>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        self.entries[i * self.dim + j]
    }

    pub fn as_operator(&self) -> HermitianOperator<T> {
        HermitianOperator::from_dense(self.dim, self.entries.clone())
            .expect("density matrix entries are Hermitian by construction")
    }

    pub fn purity(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}
