use num_traits::Zero;

use crate::error::{QfiError, Result};
use crate::linalg::{eig_full, DensityMatrix, HermitianOperator};
use crate::scalar::{Cplx, Real};

/// Largest density matrix accepted by [`exact_qfi`].
pub const QFI_ORACLE_CAP: usize = 1024;

/// Quantum Fisher information of `rho` for the generator `a`, from the
/// spectral formula `2 sum (l_i - l_j)^2 / (l_i + l_j) |<i|A|j>|^2`.
pub fn exact_qfi<T: Real>(rho: &DensityMatrix<T>, a: &HermitianOperator<T>) -> Result<T> {
    let n = rho.dim();
    if n > QFI_ORACLE_CAP {
        return Err(QfiError::Capacity {
            what: "exact QFI oracle dimension",
            requested: n,
            cap: QFI_ORACLE_CAP,
        });
    }
    if a.dim() != n {
        return Err(QfiError::DimensionMismatch {
            expected: n,
            found: a.dim(),
        });
    }
    let (values, vectors) = eig_full(&rho.as_operator())?;
    let lambda: Vec<T> = values.iter().map(|v| v.max(T::zero())).collect();
    let a_vecs: Vec<Vec<Cplx<T>>> = vectors.iter().map(|v| a.apply(v.amplitudes())).collect();
    let cutoff = T::epsilon() * T::lit(64.0);
    let two = T::lit(2.0);
    let mut total = T::zero();
    for i in 0..n {
        for j in 0..i {
            let s = lambda[i] + lambda[j];
            if s <= cutoff {
                continue;
            }
            let d = lambda[i] - lambda[j];
            let elem: Cplx<T> = vectors[i]
                .amplitudes()
                .iter()
                .zip(&a_vecs[j])
                .fold(Cplx::zero(), |acc, (x, y)| acc + x.conj() * y);
            // (i, j) and (j, i) contribute equally
            total += two * two * d * d / s * elem.norm_sqr();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::variance;
    use crate::spin::{build_collective, dicke_state, ghz_state, Representation};

    #[test]
    fn pure_state_values() {
        for n in 2..=6 {
            let rep = Representation::full(n).unwrap();
            let s = build_collective::<f64>(rep);
            let ghz = DensityMatrix::from_pure(&ghz_state(rep));
            let f = exact_qfi(&ghz, &s.jz).unwrap();
            assert!((f - (n * n) as f64).abs() < 1e-9);
        }
        let rep = Representation::symmetric(6).unwrap();
        let s = build_collective::<f64>(rep);
        let d = dicke_state(rep, 3).unwrap();
        let f = exact_qfi(&DensityMatrix::from_pure(&d), &s.jy).unwrap();
        assert!((f - 24.0).abs() < 1e-9);
        assert!((f - 4.0 * variance(&s.jy, &d).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn completely_mixed_state_has_zero_qfi() {
        let rep = Representation::full(3).unwrap();
        let s = build_collective::<f64>(rep);
        let rho = DensityMatrix::maximally_mixed(8);
        assert!(exact_qfi(&rho, &s.jy).unwrap().abs() < 1e-12);
    }
}
