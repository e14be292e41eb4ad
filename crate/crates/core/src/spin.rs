//! Collective angular-momentum operators and standard target states for N
//! qubits, in the full 2^N-dimensional space or the (N+1)-dimensional
//! symmetric (Dicke) subspace.
//!
//! Basis conventions: the full representation is the lexicographic
//! computational basis with qubit 1 as the most significant bit and `|0>`
//! carrying `J_z = +1/2`; the symmetric representation lists Dicke states by
//! descending `J_z`, so index `k` has `J_z = N/2 - k` and `k` excitations.

use num_traits::Zero;

use crate::error::{QfiError, Result};
use crate::linalg::{HermitianOperator, StateVector};
use crate::scalar::{c, re, Cplx, Real};

/// Default largest qubit number allowed in the full representation.
pub const FULL_REP_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RepresentationKind {
    Full,
    Symmetric,
}

impl std::fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RepresentationKind::Full => "full",
            RepresentationKind::Symmetric => "symmetric",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Representation {
    kind: RepresentationKind,
    n_qubits: usize,
}

impl Representation {
    pub fn full(n_qubits: usize) -> Result<Self> {
        Self::full_with_cap(n_qubits, FULL_REP_CAP)
    }

    pub fn full_with_cap(n_qubits: usize, cap: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QfiError::InvalidInput("qubit number must be positive".into()));
        }
        if n_qubits > cap {
            return Err(QfiError::Capacity {
                what: "full representation qubit number",
                requested: n_qubits,
                cap,
            });
        }
        Ok(Self {
            kind: RepresentationKind::Full,
            n_qubits,
        })
    }

    pub fn symmetric(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(QfiError::InvalidInput("qubit number must be positive".into()));
        }
        Ok(Self {
            kind: RepresentationKind::Symmetric,
            n_qubits,
        })
    }

    pub fn new(kind: RepresentationKind, n_qubits: usize) -> Result<Self> {
        match kind {
            RepresentationKind::Full => Self::full(n_qubits),
            RepresentationKind::Symmetric => Self::symmetric(n_qubits),
        }
    }

    pub fn kind(&self) -> RepresentationKind {
        self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            RepresentationKind::Full => 1usize << self.n_qubits,
            RepresentationKind::Symmetric => self.n_qubits + 1,
        }
    }
}

/// Spin component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `J_x, J_y, J_z` and their squares in one representation.
#[derive(Debug, Clone)]
pub struct CollectiveSpinSet<T: Real> {
    pub representation: Representation,
    pub jx: HermitianOperator<T>,
    pub jy: HermitianOperator<T>,
    pub jz: HermitianOperator<T>,
    pub jx2: HermitianOperator<T>,
    pub jy2: HermitianOperator<T>,
    pub jz2: HermitianOperator<T>,
}

impl<T: Real> CollectiveSpinSet<T> {
    pub fn component(&self, axis: Axis) -> &HermitianOperator<T> {
        match axis {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
        }
    }

    pub fn squared(&self, axis: Axis) -> &HermitianOperator<T> {
        match axis {
            Axis::X => &self.jx2,
            Axis::Y => &self.jy2,
            Axis::Z => &self.jz2,
        }
    }
}

/// `J_N = (N/2)(N/2 + 1)`, the symmetric-subspace value of `J_x^2 + J_y^2 + J_z^2`.
pub fn casimir(n_qubits: usize) -> f64 {
    let j = n_qubits as f64 / 2.0;
    j * (j + 1.0)
}

pub fn build_collective<T: Real>(rep: Representation) -> CollectiveSpinSet<T> {
    let (jx, jy, jz) = match rep.kind {
        RepresentationKind::Symmetric => symmetric_components(rep.n_qubits),
        RepresentationKind::Full => full_components(rep.n_qubits),
    };
    CollectiveSpinSet {
        representation: rep,
        jx2: jx.square(),
        jy2: jy.square(),
        jz2: jz.square(),
        jx,
        jy,
        jz,
    }
}

fn symmetric_components<T: Real>(
    n: usize,
) -> (HermitianOperator<T>, HermitianOperator<T>, HermitianOperator<T>) {
    let j = T::from_usize_lossy(n) * T::lit(0.5);
    let m = |k: usize| j - T::from_usize_lossy(k);
    let diag: Vec<T> = (0..=n).map(m).collect();
    let half = T::lit(0.5);
    let ladder: Vec<T> = (1..=n)
        .map(|k| {
            let mk = m(k);
            (j * (j + T::one()) - mk * (mk + T::one())).max(T::zero()).sqrt() * half
        })
        .collect();
    let x_lower: Vec<Cplx<T>> = ladder.iter().map(|&v| re(v)).collect();
    let y_lower: Vec<Cplx<T>> = ladder.iter().map(|&v| c(T::zero(), v)).collect();
    let zeros = vec![T::zero(); n + 1];
    (
        HermitianOperator::tridiagonal(&zeros, &x_lower),
        HermitianOperator::tridiagonal(&zeros, &y_lower),
        HermitianOperator::diagonal(&diag),
    )
}

fn full_components<T: Real>(
    n: usize,
) -> (HermitianOperator<T>, HermitianOperator<T>, HermitianOperator<T>) {
    let dim = 1usize << n;
    let half = T::lit(0.5);
    let jz: Vec<T> = (0..dim)
        .map(|b| (T::from_usize_lossy(n) - T::lit(2.0) * T::from_usize_lossy(b.count_ones() as usize)) * half)
        .collect();
    let first: Vec<usize> = (0..dim)
        .map(|b| {
            (0..n)
                .map(|q| b ^ (1 << q))
                .filter(|&o| o < b)
                .min()
                .unwrap_or(b)
        })
        .collect();
    let flip = |i: usize, j: usize| -> Option<usize> {
        let d = i ^ j;
        (d.count_ones() == 1).then_some(d)
    };
    // sigma_y |0> = i|1>: raising the bit value multiplies by +i/2
    let jx = HermitianOperator::from_profile_fn(first.clone(), |i, j| match flip(i, j) {
        Some(_) => re(half),
        None => Cplx::zero(),
    });
    let jy = HermitianOperator::from_profile_fn(first, |i, j| match flip(i, j) {
        Some(bit) if i & bit != 0 => c(T::zero(), half),
        Some(_) => c(T::zero(), -half),
        None => Cplx::zero(),
    });
    (jx.compact(), jy.compact(), HermitianOperator::diagonal(&jz))
}

/// Binomial coefficient as a float: exact integer arithmetic up to n = 60,
/// log-gamma above.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 60 {
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// Natural log of the binomial coefficient.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= 60 {
        return binomial(n, k).ln();
    }
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

pub fn ghz_state<T: Real>(rep: Representation) -> StateVector<T> {
    let dim = rep.dim();
    let mut a = vec![Cplx::zero(); dim];
    let amp = re(T::FRAC_1_SQRT_2());
    a[0] = amp;
    a[dim - 1] = amp;
    StateVector::from_raw_unchecked(a)
}

/// Dicke state with `m` excitations (`J_z = N/2 - m`).
pub fn dicke_state<T: Real>(rep: Representation, m: usize) -> Result<StateVector<T>> {
    let n = rep.n_qubits;
    if m > n {
        return Err(QfiError::InvalidInput(format!(
            "Dicke excitation number {m} exceeds qubit number {n}"
        )));
    }
    match rep.kind {
        RepresentationKind::Symmetric => StateVector::basis(n + 1, m),
        RepresentationKind::Full => {
            let amp = re(T::one() / T::lit(binomial(n, m)).sqrt());
            let a = (0..rep.dim())
                .map(|b| if b.count_ones() as usize == m { amp } else { Cplx::zero() })
                .collect();
            Ok(StateVector::from_raw_unchecked(a))
        }
    }
}

/// Product state with every qubit in the +1/2 eigenstate of `sigma_y / 2`.
pub fn polarized_y_state<T: Real>(rep: Representation) -> StateVector<T> {
    let n = rep.n_qubits;
    let phase = |k: usize| -> Cplx<T> {
        match k % 4 {
            0 => c(T::one(), T::zero()),
            1 => c(T::zero(), T::one()),
            2 => c(-T::one(), T::zero()),
            _ => c(T::zero(), -T::one()),
        }
    };
    let half_ln2n = 0.5 * n as f64 * std::f64::consts::LN_2;
    let a = match rep.kind {
        RepresentationKind::Symmetric => (0..=n)
            .map(|k| phase(k) * T::lit((0.5 * ln_binomial(n, k) - half_ln2n).exp()))
            .collect(),
        RepresentationKind::Full => {
            let amp = T::lit((-half_ln2n).exp());
            (0..rep.dim())
                .map(|b| phase(b.count_ones() as usize) * amp)
                .collect()
        }
    };
    StateVector::from_raw_unchecked(a)
}

/// Rank-one projector onto `s`, stored in the tightest envelope its support allows.
pub fn projector<T: Real>(s: &StateVector<T>) -> HermitianOperator<T> {
    let a = s.amplitudes();
    let support_start = a.iter().position(|z| !z.is_zero()).unwrap_or(0);
    let first: Vec<usize> = a
        .iter()
        .enumerate()
        .map(|(i, z)| if z.is_zero() { i } else { support_start })
        .collect();
    HermitianOperator::from_profile_fn(first, |i, j| a[i] * a[j].conj()).compact()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_matmul, eig_full, expectation, variance};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_qubit_jz() {
        let s = build_collective::<f64>(Representation::full(1).unwrap());
        assert_eq!(s.jz.to_dense(), vec![re(0.5), re(0.0), re(0.0), re(-0.5)]);
    }

    #[test]
    fn commutators_hold_in_both_representations() {
        for rep in [
            Representation::symmetric(5).unwrap(),
            Representation::full(3).unwrap(),
            Representation::symmetric(40).unwrap(),
        ] {
            let s = build_collective::<f64>(rep);
            let n = rep.dim();
            let ops = [s.jx.to_dense(), s.jy.to_dense(), s.jz.to_dense()];
            for (a, b, cc) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let ab = dense_matmul(n, &ops[a], &ops[b]);
                let ba = dense_matmul(n, &ops[b], &ops[a]);
                let err: f64 = (0..n * n)
                    .map(|k| (ab[k] - ba[k] - ops[cc][k] * c(0.0, 1.0)).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(err <= 1e-10 * rep.n_qubits() as f64, "{rep:?} {a}{b}: {err}");
            }
        }
    }

    #[test]
    fn symmetric_casimir() {
        for n in [1, 4, 9, 30] {
            let s = build_collective::<f64>(Representation::symmetric(n).unwrap());
            let j2 = s.jx2.add_scaled(&s.jy2, 1.0).unwrap().add_scaled(&s.jz2, 1.0).unwrap();
            let d = j2.to_dense();
            for i in 0..=n {
                for k in 0..=n {
                    let want = if i == k { casimir(n) } else { 0.0 };
                    assert!((d[i * (n + 1) + k] - re(want)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn full_jz_multiplicities_are_binomial() {
        for n in 1..=6 {
            let s = build_collective::<f64>(Representation::full(n).unwrap());
            let (vals, _) = eig_full(&s.jz).unwrap();
            for k in 0..=n {
                let m = n as f64 / 2.0 - k as f64;
                let count = vals.iter().filter(|v| close(**v, m, 1e-12)).count();
                assert_eq!(count as f64, binomial(n, k));
            }
        }
    }

    #[test]
    fn full_operators_restricted_to_dicke_states_match_symmetric() {
        for n in 1..=6 {
            let full = build_collective::<f64>(Representation::full(n).unwrap());
            let sym = build_collective::<f64>(Representation::symmetric(n).unwrap());
            let dicke: Vec<_> = (0..=n)
                .map(|m| dicke_state::<f64>(Representation::full(n).unwrap(), m).unwrap())
                .collect();
            for (fo, so) in [(&full.jx, &sym.jx), (&full.jy, &sym.jy), (&full.jz, &sym.jz)] {
                for a in 0..=n {
                    let fa = fo.apply(dicke[a].amplitudes());
                    for b in 0..=n {
                        let v: Cplx<f64> = dicke[b]
                            .amplitudes()
                            .iter()
                            .zip(&fa)
                            .map(|(x, y)| x.conj() * y)
                            .sum();
                        assert!((v - so.get(b, a)).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn states_have_expected_moments() {
        for rep in [Representation::symmetric(4).unwrap(), Representation::full(4).unwrap()] {
            let s = build_collective::<f64>(rep);
            let y = polarized_y_state::<f64>(rep);
            assert!(close(expectation(&s.jy, &y).unwrap(), 2.0, 1e-12));
            assert!(variance(&s.jy, &y).unwrap().abs() < 1e-12);
            let g = ghz_state::<f64>(rep);
            let top = dicke_state::<f64>(rep, rep.n_qubits()).unwrap();
            assert!(close(g.fidelity(&top), 0.5, 1e-14));
        }
        let rep = Representation::symmetric(6).unwrap();
        let d = dicke_state::<f64>(rep, 3).unwrap();
        let s = build_collective::<f64>(rep);
        assert!(expectation(&s.jz, &d).unwrap().abs() < 1e-14);
        assert!(close(variance(&s.jy, &d).unwrap(), 6.0, 1e-12));
        let y = polarized_y_state::<f64>(rep);
        assert!(close(d.fidelity(&y), 0.3125, 1e-12));
    }

    #[test]
    fn projector_of_ghz_is_idempotent_and_sparse() {
        let rep = Representation::symmetric(20).unwrap();
        let p = projector(&ghz_state::<f64>(rep));
        let d = p.to_dense();
        let p2 = dense_matmul(21, &d, &d);
        for (a, b) in p2.iter().zip(&d) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((p.trace() - 1.0).abs() < 1e-12);
        assert!(p.square().to_dense().iter().zip(&d).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn binomial_paths_agree() {
        assert_eq!(binomial(60, 30), 118264581564861424.0);
        assert!((binomial(61, 30) / 232714176627630544.0 - 1.0).abs() < 1e-10);
        assert!((ln_binomial(7900, 3950) - binomial(7900, 3950).ln()).abs() < 1e-9 || binomial(7900, 3950).is_infinite());
    }
}
