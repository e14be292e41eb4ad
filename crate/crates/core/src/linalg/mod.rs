//! Hermitian matrix algebra: operators, states, extreme eigenpairs, full
//! spectra, expectations and variances.

mod dense;
mod operator;
mod profile;
mod state;

use num_traits::Zero;

pub use operator::{dense_matmul, HermitianOperator};
pub(crate) use operator::Layout;
pub(crate) use dense::pseudo_random;
pub(crate) use profile::TopEigen;
pub use state::{DensityMatrix, StateVector};

use crate::error::{QfiError, Result};
use crate::scalar::{Cplx, Real};

/// Largest dimension accepted by [`eig_full`] by default.
pub const EIG_FULL_CAP: usize = 4096;

/// Relative bracket width used for extreme eigenvalues.
pub(crate) fn default_eig_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(512.0))
}

fn check_finite<T: Real>(h: &HermitianOperator<T>) -> Result<()> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(QfiError::InvalidInput("operator has non-finite entries".into()))
    }
}

/// Top eigenpair of a matrix given as layout plus aligned entries.
pub(crate) fn top_eigen_raw<T: Real>(
    layout: &Layout,
    data: &[Cplx<T>],
    warm: Option<&[Cplx<T>]>,
    want_gap: bool,
    tol_rel: T,
) -> TopEigen<T> {
    match layout {
        Layout::Profile { .. } => profile::top_eigen(layout, data, warm, want_gap, tol_rel),
        Layout::Dense { n } => {
            let n = *n;
            let t = dense::tridiagonalize(n, data.to_vec());
            let (glo, ghi) = t.gershgorin();
            let tol = tol_rel * glo.abs().max(ghi.abs()).max(T::min_positive_value().sqrt());
            let (lo, hi) = t.kth_largest(1, tol);
            let z = t.inverse_iteration(hi);
            let vector = t.back_transform(&z);
            let gap = if want_gap {
                if n < 2 {
                    Some(T::infinity())
                } else {
                    let (lo2, hi2) = t.kth_largest(2, tol);
                    Some((lo - hi2).max(T::zero()).max(lo - (lo2 + hi2) * T::lit(0.5)))
                }
            } else {
                None
            };
            TopEigen {
                upper: hi,
                lower: lo,
                vector,
                gap,
                factorizations: 1,
            }
        }
    }
}

pub(crate) fn top_eigen<T: Real>(
    h: &HermitianOperator<T>,
    warm: Option<&[Cplx<T>]>,
    want_gap: bool,
) -> TopEigen<T> {
    top_eigen_raw(h.layout(), h.data(), warm, want_gap, default_eig_tol())
}

/// Largest eigenvalue and a unit eigenvector.
///
/// Dense operators are reduced to tridiagonal form and bisected; envelope
/// (banded) operators use inertia-counting factorizations, which keeps
/// thousand-dimensional spin problems cheap.
pub fn lambda_max<T: Real>(h: &HermitianOperator<T>) -> Result<(T, StateVector<T>)> {
    check_finite(h)?;
    let top = top_eigen(h, None, false);
    let v = StateVector::normalized(top.vector)?;
    let rq = v.expect(h);
    let value = if rq >= top.lower && rq <= top.upper {
        rq
    } else {
        (top.lower + top.upper) * T::lit(0.5)
    };
    Ok((value, v))
}

/// Largest eigenvalue, eigenvector and the distance to the second eigenvalue.
pub fn lambda_max_with_gap<T: Real>(h: &HermitianOperator<T>) -> Result<(T, StateVector<T>, T)> {
    check_finite(h)?;
    let top = top_eigen(h, None, true);
    let v = StateVector::normalized(top.vector)?;
    let rq = v.expect(h).max(top.lower).min(top.upper);
    Ok((rq, v, top.gap.unwrap_or(T::infinity())))
}

/// Smallest eigenvalue and a unit eigenvector, computed as `-lambda_max(-H)`.
pub fn ground_state<T: Real>(h: &HermitianOperator<T>) -> Result<(T, StateVector<T>)> {
    let (v, s) = lambda_max(&h.scaled(-T::one()))?;
    Ok((-v, s))
}

/// Full spectrum (ascending) and orthonormal eigenvectors.
pub fn eig_full<T: Real>(h: &HermitianOperator<T>) -> Result<(Vec<T>, Vec<StateVector<T>>)> {
    eig_full_with_cap(h, EIG_FULL_CAP)
}

pub fn eig_full_with_cap<T: Real>(
    h: &HermitianOperator<T>,
    cap: usize,
) -> Result<(Vec<T>, Vec<StateVector<T>>)> {
    check_finite(h)?;
    let n = h.dim();
    if n > cap {
        return Err(QfiError::Capacity {
            what: "full eigendecomposition",
            requested: n,
            cap,
        });
    }
    let t = dense::tridiagonalize(n, h.to_dense());
    let (values, z) = t.ql_implicit();
    let vectors = (0..n)
        .map(|k| {
            let col: Vec<T> = (0..n).map(|i| z[i * n + k]).collect();
            StateVector::from_raw_unchecked(t.back_transform(&col))
        })
        .collect();
    Ok((values, vectors))
}

/// Anything an expectation value can be taken in.
pub trait QuantumState<T: Real> {
    fn dim(&self) -> usize;
    fn expect(&self, h: &HermitianOperator<T>) -> T;
}

impl<T: Real> QuantumState<T> for StateVector<T> {
    fn dim(&self) -> usize {
        StateVector::dim(self)
    }

    fn expect(&self, h: &HermitianOperator<T>) -> T {
        let a = self.amplitudes();
        let hv = h.apply(a);
        a.iter().zip(&hv).map(|(x, y)| (x.conj() * y).re).sum()
    }
}

impl<T: Real> QuantumState<T> for DensityMatrix<T> {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn expect(&self, h: &HermitianOperator<T>) -> T {
        let n = self.dim();
        let mut acc = Cplx::zero();
        for i in 0..n {
            for j in 0..n {
                acc += h.get(i, j) * self.get(j, i);
            }
        }
        acc.re
    }
}

/// <H> in a pure or mixed state.
pub fn expectation<T: Real, S: QuantumState<T> + ?Sized>(h: &HermitianOperator<T>, s: &S) -> Result<T> {
    if h.dim() != s.dim() {
        return Err(QfiError::DimensionMismatch {
            expected: h.dim(),
            found: s.dim(),
        });
    }
    check_finite(h)?;
    Ok(s.expect(h))
}

/// <H^2> - <H>^2 in a pure or mixed state.
pub fn variance<T: Real, S: QuantumState<T> + ?Sized>(h: &HermitianOperator<T>, s: &S) -> Result<T> {
    let m = expectation(h, s)?;
    let m2 = expectation(&h.square(), s)?;
    Ok(m2 - m * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn diagonal_examples() {
        let h = HermitianOperator::<f64>::diagonal(&[-1.0, 0.0, 3.0]);
        let (v, s) = lambda_max(&h).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        assert!((s.amplitudes()[2].norm() - 1.0).abs() < 1e-9);
        let h = HermitianOperator::<f64>::diagonal(&[5.0, 2.0, 7.0]);
        let (g, s) = ground_state(&h).unwrap();
        assert!((g - 2.0).abs() < 1e-12);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pauli_x_spectrum() {
        let h = HermitianOperator::<f64>::from_dense(
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let (vals, vecs) = eig_full(&h).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        assert!(vecs[0].inner(&vecs[1]).norm() < 1e-14);
    }

    #[test]
    fn eig_full_respects_cap() {
        let h = HermitianOperator::<f64>::identity(8);
        assert!(matches!(
            eig_full_with_cap(&h, 4),
            Err(QfiError::Capacity { .. })
        ));
    }

    #[test]
    fn f32_top_eigenvalue() {
        let h = HermitianOperator::<f32>::tridiagonal(&[1.0, 2.0, 3.0], &[c(1.0, 0.0), c(0.0, 1.0)]);
        let (v, _) = lambda_max(&h).unwrap();
        let (vals, _) = eig_full(&h).unwrap();
        assert!((v - vals[2]).abs() < 1e-4);
    }
}
