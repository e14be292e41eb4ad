//! Dense Hermitian eigenvalue routines: Householder reduction to a real
//! symmetric tridiagonal matrix, Sturm-sequence bisection, tridiagonal
//! inverse iteration and implicit QL for complete spectra.

use num_traits::Zero;

use crate::scalar::{Cplx, Real};

/// Largest size for which extreme eigenvalues come from QL rather than bisection.
const SMALL_QL: usize = 32;

/// Real tridiagonal form `T = P* Q* A Q P` of a Hermitian matrix, where `Q`
/// is a product of Householder reflectors and `P` a diagonal phase matrix.
pub(crate) struct Tridiagonal<T: Real> {
    pub n: usize,
    pub d: Vec<T>,
    pub e: Vec<T>,
    reflectors: Vec<Option<Vec<Cplx<T>>>>,
    phases: Vec<Cplx<T>>,
}

/// Reduces the row-major Hermitian matrix `a` (consumed) to real tridiagonal form.
pub(crate) fn tridiagonalize<T: Real>(n: usize, mut a: Vec<Cplx<T>>) -> Tridiagonal<T> {
    debug_assert_eq!(a.len(), n * n);
    let two = T::lit(2.0);
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![Cplx::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let tail2: T = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail2 == T::zero() {
            reflectors.push(None);
            continue;
        }
        let sigma = (tail2 + x0.norm_sqr()).sqrt();
        let ax0 = x0.norm();
        let phase = if ax0 > T::zero() {
            x0 / ax0
        } else {
            Cplx::new(T::one(), T::zero())
        };
        let alpha = -phase * sigma;
        let inv = T::one() / (two * sigma * (sigma + ax0)).sqrt();
        let mut v = Vec::with_capacity(m);
        v.push(phase * (ax0 + sigma) * inv);
        for i in k + 2..n {
            v.push(a[i * n + k] * inv);
        }
        // p = 2 B v on the trailing block
        let off = k + 1;
        for (r, pr) in p[..m].iter_mut().enumerate() {
            let row = &a[(off + r) * n + off..(off + r) * n + n];
            let mut acc = Cplx::zero();
            for (b, vj) in row.iter().zip(&v) {
                acc += *b * *vj;
            }
            *pr = acc * two;
        }
        let kk: Cplx<T> = v.iter().zip(&p[..m]).map(|(vi, pi)| vi.conj() * pi).sum();
        let kr = kk.re;
        let q: Vec<Cplx<T>> = p[..m].iter().zip(&v).map(|(pi, vi)| *pi - *vi * kr).collect();
        for r in 0..m {
            let (vr, qr) = (v[r], q[r]);
            let row = &mut a[(off + r) * n + off..(off + r) * n + n];
            for (c, b) in row.iter_mut().enumerate() {
                *b -= vr * q[c].conj() + qr * v[c].conj();
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            a[i * n + k] = Cplx::zero();
            a[k * n + i] = Cplx::zero();
        }
        reflectors.push(Some(v));
    }
    let d: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = Vec::with_capacity(n.saturating_sub(1));
    let mut phases = Vec::with_capacity(n);
    let mut ph = Cplx::new(T::one(), T::zero());
    phases.push(ph);
    for k in 0..n.saturating_sub(1) {
        let ek = a[(k + 1) * n + k];
        let mag = ek.norm();
        if mag > T::zero() {
            ph = ph * (ek / mag);
        }
        phases.push(ph);
        e.push(mag);
    }
    Tridiagonal {
        n,
        d,
        e,
        reflectors,
        phases,
    }
}

impl<T: Real> Tridiagonal<T> {
    /// Maps an eigenvector of the real tridiagonal matrix back to the original basis.
    pub fn back_transform(&self, z: &[T]) -> Vec<Cplx<T>> {
        let two = T::lit(2.0);
        let mut y: Vec<Cplx<T>> = z.iter().zip(&self.phases).map(|(zi, p)| *p * *zi).collect();
        for (k, refl) in self.reflectors.iter().enumerate().rev() {
            if let Some(v) = refl {
                let s = &mut y[k + 1..];
                let dot: Cplx<T> = v.iter().zip(s.iter()).map(|(vi, yi)| vi.conj() * yi).sum();
                for (yi, vi) in s.iter_mut().zip(v) {
                    *yi -= *vi * dot * two;
                }
            }
        }
        y
    }

    fn pivmin(&self) -> T {
        let emax = self.e.iter().fold(T::one(), |m, x| m.max(*x * *x));
        T::min_positive_value() * emax * T::lit(4.0)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: T) -> usize {
        let pivmin = self.pivmin();
        let mut q = self.d[0] - sigma;
        let mut count = 0;
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        if q < T::zero() {
            count += 1;
        }
        for i in 1..self.n {
            q = self.d[i] - sigma - self.e[i - 1] * self.e[i - 1] / q;
            if q.abs() <= pivmin {
                q = -pivmin;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    pub fn gershgorin(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..self.n {
            let mut r = T::zero();
            if i > 0 {
                r += self.e[i - 1];
            }
            if i + 1 < self.n {
                r += self.e[i];
            }
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// Bisection enclosure `(lo, hi)` of the `k`-th largest eigenvalue (k = 1 is the top).
    pub fn kth_largest(&self, k: usize, tol: T) -> (T, T) {
        let need = self.n + 1 - k;
        if self.n <= SMALL_QL {
            // QL estimate, accepted only once two Sturm counts confirm it
            let est = self.eigenvalues()[self.n - k];
            let h = (tol * T::lit(0.5)).max(T::epsilon() * est.abs());
            let (lo, hi) = (est - h, est + h);
            if self.count_below(hi) >= need && self.count_below(lo) < need {
                return (lo, hi);
            }
        }
        let (mut lo, mut hi) = self.gershgorin();
        let slack = tol.max(T::epsilon() * (lo.abs().max(hi.abs())));
        lo -= slack;
        hi += slack;
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = lo + (hi - lo) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= need {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }

    /// Inverse iteration for the eigenvector of eigenvalue ~`lambda`.
    pub fn inverse_iteration(&self, lambda: T) -> Vec<T> {
        let n = self.n;
        if n == 1 {
            return vec![T::one()];
        }
        let scale = self
            .d
            .iter()
            .chain(&self.e)
            .fold(T::zero(), |m, x| m.max(x.abs()))
            .max(T::min_positive_value());
        let tiny = T::epsilon() * scale;
        // LU with partial pivoting of T - lambda I (LAPACK gttrf layout)
        let mut dl: Vec<T> = self.e.clone();
        let mut dd: Vec<T> = self.d.iter().map(|x| *x - lambda).collect();
        let mut du: Vec<T> = self.e.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swap = vec![false; n - 1];
        for i in 0..n - 1 {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] == T::zero() {
                    dd[i] = tiny;
                }
                let fact = dl[i] / dd[i];
                dl[i] = fact;
                dd[i + 1] -= fact * du[i];
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if dd[n - 1] == T::zero() {
            dd[n - 1] = tiny;
        }
        let solve = |b: &mut Vec<T>| {
            for i in 0..n - 1 {
                if swap[i] {
                    let t = b[i];
                    b[i] = b[i + 1];
                    b[i + 1] = t - dl[i] * b[i];
                } else {
                    let t = b[i];
                    b[i + 1] -= dl[i] * t;
                }
            }
            b[n - 1] = b[n - 1] / dd[n - 1];
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2];
            for i in (0..n.saturating_sub(2)).rev() {
                b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i];
            }
        };
        let mut x: Vec<T> = (0..n).map(|i| T::one() + T::lit(0.37) * pseudo_random(i)).collect();
        for _ in 0..4 {
            solve(&mut x);
            let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
            if !(norm.is_finite() && norm > T::zero()) {
                break;
            }
            for v in &mut x {
                *v /= norm;
            }
        }
        normalize_real(&mut x);
        x
    }

    /// Complete spectrum (ascending) with eigenvectors as columns of `z` (row-major n x n).
    pub fn ql_implicit(&self) -> (Vec<T>, Vec<T>) {
        let (d, z) = self.ql(true);
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&k| d[k]).collect();
        let mut vectors = vec![T::zero(); n * n];
        for (col, &k) in order.iter().enumerate() {
            for i in 0..n {
                vectors[i * n + col] = z[i * n + k];
            }
        }
        (values, vectors)
    }

    /// Eigenvalues only, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let (mut d, _) = self.ql(false);
        d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        d
    }

    /// Implicit QL sweeps; returns the unsorted diagonal and, if asked, the
    /// accumulated rotations.
    fn ql(&self, vectors: bool) -> (Vec<T>, Vec<T>) {
        let n = self.n;
        let mut d = self.d.clone();
        let mut e = self.e.clone();
        e.push(T::zero());
        let mut z = vec![T::zero(); if vectors { n * n } else { 0 }];
        if vectors {
            for i in 0..n {
                z[i * n + i] = T::one();
            }
        }
        let two = T::lit(2.0);
        let eps = T::epsilon();
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= eps * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 100 {
                    break;
                }
                let mut g = (d[l + 1] - d[l]) / (two * e[l]);
                let mut r = g.hypot(T::one());
                g = d[m] - d[l] + e[l] / (g + if g >= T::zero() { r.abs() } else { -r.abs() });
                let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
                let mut i = m;
                let mut underflow = false;
                while i > l {
                    i -= 1;
                    let mut f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == T::zero() {
                        d[i + 1] -= p;
                        e[m] = T::zero();
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + two * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if !vectors {
                        continue;
                    }
                    for k in 0..n {
                        f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = T::zero();
            }
        }
        (d, z)
    }
}

fn normalize_real<T: Real>(x: &mut [T]) {
    let norm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if norm > T::zero() && norm.is_finite() {
        for v in x.iter_mut() {
            *v /= norm;
        }
    } else {
        let n = x.len();
        for v in x.iter_mut() {
            *v = T::one() / T::from_usize_lossy(n).sqrt();
        }
    }
}

/// Deterministic pseudo-random value in [-1, 1) used to seed iterations.
pub(crate) fn pseudo_random<T: Real>(i: usize) -> T {
    let mut z = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    T::lit((z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
}
