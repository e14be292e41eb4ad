//! Exact block reduction for permutation-invariant problems in the full
//! qubit representation.
//!
//! When the generator and every constraint commute with each qubit swap,
//! they also commute with a generic real combination `Z` of swaps. The
//! eigenspaces of `Z` are then invariant subspaces of every operator, so
//! `lambda_max` over the full space is the largest of the block maxima.
//! Each eigenspace is one copy of a spin-`j` irrep, and swap-invariant
//! operators act identically on all copies of the same `j`, so one copy per
//! `j` is kept. At N = 4 that turns a 16 x 16 problem into blocks of size
//! 5, 3 and 1.

use num_traits::Zero;

use crate::linalg::{eig_full_with_cap, pseudo_random, HermitianOperator};
use crate::scalar::{Cplx, Real};

/// Largest dimension for which the reduction is attempted.
pub(crate) const BLOCK_DIM_CAP: usize = 1024;

/// Orthonormal bases (row-major `dim x d`) of one invariant block per total
/// spin, or `None` when the operators are not swap-invariant or nothing is
/// gained.
pub(crate) fn permutation_blocks<T: Real>(
    n_qubits: usize,
    ops: &[&HermitianOperator<T>],
) -> Option<Vec<Vec<Cplx<T>>>> {
    if n_qubits < 2 || n_qubits >= usize::BITS as usize {
        return None;
    }
    let dim = 1usize << n_qubits;
    if dim > BLOCK_DIM_CAP || ops.iter().any(|o| o.dim() != dim) {
        return None;
    }
    let mut swaps = Vec::new();
    for i in 0..n_qubits {
        for j in i + 1..n_qubits {
            let coef = T::one() + T::lit(0.5) * pseudo_random::<T>(swaps.len() + 17);
            swaps.push((i, j, coef));
        }
    }
    let swap = |b: usize, i: usize, j: usize| -> usize {
        if (b >> i) & 1 == (b >> j) & 1 {
            b
        } else {
            b ^ (1 << i) ^ (1 << j)
        }
    };

    let dense: Vec<Vec<Cplx<T>>> = ops.iter().map(|o| o.to_dense()).collect();
    let scale = |m: &[Cplx<T>]| m.iter().fold(T::zero(), |a, z| a.max(z.norm())).max(T::min_positive_value());
    let tol = T::lit(1e-10);
    for m in &dense {
        let limit = tol * scale(m);
        for b in 0..dim {
            for c in 0..dim {
                for &(i, j, _) in &swaps {
                    if (m[swap(b, i, j) * dim + c] - m[b * dim + swap(c, i, j)]).norm() > limit {
                        return None;
                    }
                }
            }
        }
    }

    let mut z = vec![T::zero(); dim * dim];
    for b in 0..dim {
        for &(i, j, coef) in &swaps {
            z[b * dim + swap(b, i, j)] += coef;
        }
    }
    let z = HermitianOperator::from_real_dense(dim, &z).ok()?;
    let (values, vectors) = eig_full_with_cap(&z, BLOCK_DIM_CAP).ok()?;
    let spread = values.iter().fold(T::one(), |a, v| a.max(v.abs()));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..dim {
        match groups.last_mut() {
            Some(g) if values[k] - values[g[g.len() - 1]] <= T::lit(1e-8) * spread => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    // sum_{i<j} P_ij = j(j+1) + N(N-4)/4 on spin j, so its expectation in
    // any vector of a block names the block's total spin
    let spin_key = |k: usize| -> T {
        let v = vectors[k].amplitudes();
        let mut acc = T::zero();
        for (b, vb) in v.iter().enumerate() {
            for &(i, j, _) in &swaps {
                acc += (vb.conj() * v[swap(b, i, j)]).re;
            }
        }
        acc
    };
    let mut keys: Vec<T> = Vec::new();
    groups.retain(|g| {
        let key = spin_key(g[0]);
        if keys.iter().any(|k| (*k - key).abs() < T::lit(0.25)) {
            false
        } else {
            keys.push(key);
            true
        }
    });
    if groups.len() < 2 && groups.iter().all(|g| g.len() == dim) {
        return None;
    }
    let bases: Vec<Vec<Cplx<T>>> = groups
        .iter()
        .map(|g| {
            let d = g.len();
            let mut basis = vec![Cplx::zero(); dim * d];
            for (col, &k) in g.iter().enumerate() {
                for (row, amp) in vectors[k].amplitudes().iter().enumerate() {
                    basis[row * d + col] = *amp;
                }
            }
            basis
        })
        .collect();

    // The grouping is only trusted once every operator is seen to map each
    // kept block into itself.
    for m in &dense {
        let limit = tol * scale(m);
        for basis in &bases {
            let d = basis.len() / dim;
            let image = apply(m, dim, basis, d);
            let block = project_image(basis, &image, dim, d);
            for row in 0..dim {
                for col in 0..d {
                    let mut back = Cplx::zero();
                    for k in 0..d {
                        back += basis[row * d + k] * block[k * d + col];
                    }
                    if (image[row * d + col] - back).norm() > limit {
                        return None;
                    }
                }
            }
        }
    }
    Some(bases)
}

/// `M V` for row-major `M` (`dim x dim`) and `V` (`dim x d`).
fn apply<T: Real>(m: &[Cplx<T>], dim: usize, basis: &[Cplx<T>], d: usize) -> Vec<Cplx<T>> {
    let mut out = vec![Cplx::zero(); dim * d];
    for row in 0..dim {
        for k in 0..dim {
            let x = m[row * dim + k];
            if x.is_zero() {
                continue;
            }
            for col in 0..d {
                out[row * d + col] += x * basis[k * d + col];
            }
        }
    }
    out
}

/// `V^dagger (M V)`.
fn project_image<T: Real>(basis: &[Cplx<T>], image: &[Cplx<T>], dim: usize, d: usize) -> Vec<Cplx<T>> {
    let mut out = vec![Cplx::zero(); d * d];
    for row in 0..dim {
        for i in 0..d {
            let vi = basis[row * d + i].conj();
            for j in 0..d {
                out[i * d + j] += vi * image[row * d + j];
            }
        }
    }
    out
}

/// `V^dagger M V`, made exactly Hermitian.
pub(crate) fn project<T: Real>(op: &HermitianOperator<T>, basis: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let dim = op.dim();
    let d = basis.len() / dim;
    let mut out = project_image(basis, &apply(&op.to_dense(), dim, basis, d), dim, d);
    let half = T::lit(0.5);
    for i in 0..d {
        for j in i..d {
            let z = (out[i * d + j] + out[j * d + i].conj()) * half;
            out[i * d + j] = z;
            out[j * d + i] = z.conj();
        }
    }
    out
}

/// `V x` for a block vector `x`.
pub(crate) fn embed<T: Real>(basis: &[Cplx<T>], x: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let d = x.len();
    basis
        .chunks(d)
        .map(|row| row.iter().zip(x).fold(Cplx::zero(), |acc, (v, y)| acc + *v * *y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lambda_max;
    use crate::spin::{build_collective, ghz_state, projector, Representation};

    #[test]
    fn spin_operators_split_into_irreps() {
        let rep = Representation::full(4).unwrap();
        let s = build_collective::<f64>(rep);
        let ghz = projector(&ghz_state::<f64>(rep));
        let bases = permutation_blocks(4, &[&s.jy, &s.jz, &s.jx2, &ghz]).unwrap();
        let mut dims: Vec<usize> = bases.iter().map(|b| b.len() / 16).collect();
        dims.sort_unstable();
        assert_eq!(dims, vec![1, 3, 5]);
        let h = ghz.scaled(3.0).add_scaled(&s.jy, 0.7).unwrap().add_scaled(&s.jx2, -0.4).unwrap();
        let (full, _) = lambda_max(&h).unwrap();
        let best = bases
            .iter()
            .map(|b| {
                let d = b.len() / 16;
                let m = HermitianOperator::from_dense(d, project(&h, b)).unwrap();
                lambda_max(&m).unwrap().0
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((full - best).abs() < 1e-12, "{full} vs {best}");
    }

    #[test]
    fn non_invariant_operators_are_left_alone() {
        let rep = Representation::full(3).unwrap();
        let s = build_collective::<f64>(rep);
        let mut diag = vec![0.0; 8];
        diag[1] = 1.0;
        let single = HermitianOperator::diagonal(&diag);
        assert!(permutation_blocks(3, &[&s.jy, &single]).is_none());
        assert!(permutation_blocks(3, &[&s.jy, &s.jz]).is_some());
    }
}
