//! Extreme eigenpairs of envelope-stored Hermitian matrices.
//!
//! The top eigenvalue is bracketed by spectrum slicing: an `LDL*`
//! factorization of `sigma I - M` has as many negative pivots as `M` has
//! eigenvalues above `sigma` (Sylvester inertia). Rayleigh quotients of
//! inverse-iteration vectors supply lower bounds, successful positive-definite
//! factorizations supply upper bounds, and the shift is steered so a good
//! starting vector closes the bracket in a handful of factorizations. Fill-in
//! never leaves the envelope, so each factorization costs O(n b^2) for
//! bandwidth b.

use num_traits::Zero;

use super::dense::pseudo_random;
use super::operator::Layout;
use crate::scalar::{Cplx, Real};

/// Top eigenpair with a certified bracket `[lower, upper]` on the eigenvalue.
#[derive(Debug, Clone)]
pub(crate) struct TopEigen<T: Real> {
    pub upper: T,
    pub lower: T,
    pub vector: Vec<Cplx<T>>,
    /// Distance to the second eigenvalue, when requested.
    pub gap: Option<T>,
    /// Inertia factorizations spent, reported for diagnostics.
    #[cfg_attr(not(test), allow(dead_code))]
    pub factorizations: usize,
}

struct Ldl<T: Real> {
    l: Vec<Cplx<T>>,
    d: Vec<T>,
    scratch: Vec<Cplx<T>>,
    negatives: usize,
}

impl<T: Real> Ldl<T> {
    fn new(layout: &Layout) -> Self {
        Self {
            l: vec![Cplx::zero(); layout.len()],
            d: vec![T::zero(); layout.dim()],
            scratch: vec![Cplx::zero(); layout.dim()],
            negatives: 0,
        }
    }

    /// Factorizes `sigma I - M`.
    fn factor(&mut self, layout: &Layout, data: &[Cplx<T>], sigma: T, tiny: T) {
        let Layout::Profile { n, first, start } = layout else {
            unreachable!("profile factorization on a dense layout")
        };
        self.negatives = 0;
        for i in 0..*n {
            let fi = first[i];
            let base = start[i];
            let u = &mut self.scratch;
            for j in fi..i {
                let fj = first[j];
                let bj = start[j];
                let mut t = -data[base + j - fi];
                for k in fi.max(fj)..j {
                    t -= u[k] * self.l[bj + k - fj].conj();
                }
                u[j] = t;
                self.l[base + j - fi] = t / self.d[j];
            }
            let mut di = sigma - data[base + i - fi].re;
            for k in fi..i {
                di -= (u[k] * self.l[base + k - fi].conj()).re;
            }
            if di.abs() < tiny {
                di = tiny;
            }
            if di < T::zero() {
                self.negatives += 1;
            }
            self.d[i] = di;
        }
    }

    /// Solves `(sigma I - M) x = b` in place.
    fn solve(&self, layout: &Layout, b: &mut [Cplx<T>]) {
        let Layout::Profile { n, first, start } = layout else {
            unreachable!()
        };
        for i in 0..*n {
            let fi = first[i];
            let base = start[i];
            let mut acc = b[i];
            for k in fi..i {
                acc -= self.l[base + k - fi] * b[k];
            }
            b[i] = acc;
        }
        for i in 0..*n {
            b[i] = b[i] / self.d[i];
        }
        for i in (0..*n).rev() {
            let fi = first[i];
            let base = start[i];
            let xi = b[i];
            for k in fi..i {
                b[k] -= self.l[base + k - fi].conj() * xi;
            }
        }
    }
}

fn normalize<T: Real>(x: &mut [Cplx<T>]) -> bool {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if !(norm.is_finite() && norm > T::zero()) {
        return false;
    }
    for z in x.iter_mut() {
        *z = *z / norm;
    }
    true
}

fn rayleigh<T: Real>(layout: &Layout, data: &[Cplx<T>], x: &[Cplx<T>], buf: &mut [Cplx<T>]) -> T {
    layout.matvec(data, x, buf);
    x.iter().zip(buf.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

pub(crate) fn start_vector<T: Real>(n: usize, warm: Option<&[Cplx<T>]>) -> Vec<Cplx<T>> {
    let mut x: Vec<Cplx<T>> = match warm {
        Some(w) if w.len() == n => {
            let wn = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            let mix = T::lit(1e-3) / T::from_usize_lossy(n).sqrt();
            w.iter()
                .enumerate()
                .map(|(i, z)| *z / wn + Cplx::new(mix * pseudo_random::<T>(i), T::zero()))
                .collect()
        }
        _ => (0..n)
            .map(|i| Cplx::new(T::one() + T::lit(0.37) * pseudo_random::<T>(i), T::zero()))
            .collect(),
    };
    if !normalize(&mut x) {
        x = vec![Cplx::new(T::one() / T::from_usize_lossy(n).sqrt(), T::zero()); n];
    }
    x
}

/// Largest eigenvalue of the profile-stored Hermitian matrix, bracketed to
/// `tol_rel` times the spectral scale.
pub(crate) fn top_eigen<T: Real>(
    layout: &Layout,
    data: &[Cplx<T>],
    warm: Option<&[Cplx<T>]>,
    want_gap: bool,
    tol_rel: T,
) -> TopEigen<T> {
    let n = layout.dim();
    let (glo, ghi) = layout.gershgorin(data);
    let scale = glo.abs().max(ghi.abs()).max(T::min_positive_value().sqrt());
    let tol = tol_rel * scale;
    let tiny = T::epsilon() * scale * T::lit(1e-3);
    let mut buf = vec![Cplx::zero(); n];

    let mut x = start_vector(n, warm);
    let mut rho = rayleigh(layout, data, &x, &mut buf);
    let max_diag = (0..n)
        .map(|i| data[layout.diag_index(i)].re)
        .fold(T::neg_infinity(), T::max);
    let mut lo = rho.max(max_diag);
    let mut hi = ghi + tol;
    let mut work = Ldl::new(layout);
    let mut at_hi = Ldl::new(layout);
    let mut have_hi_factor = false;
    let mut factorizations = 0;
    let mut frac = T::lit(0.01);
    let half = T::lit(0.5);
    let mut y = vec![Cplx::zero(); n];

    for _ in 0..400 {
        let sigma = if hi - lo <= tol {
            if have_hi_factor {
                break;
            }
            hi
        } else {
            (lo + ((hi - lo) * frac).max(tol * half)).min(hi)
        };
        work.factor(layout, data, sigma, tiny);
        factorizations += 1;
        let success = work.negatives == 0;
        if success {
            hi = sigma;
        } else {
            lo = lo.max(sigma);
        }
        // inverse iteration with the fresh factor; any vector's Rayleigh
        // quotient is a valid lower bound
        for _ in 0..3 {
            y.copy_from_slice(&x);
            work.solve(layout, &mut y);
            if !normalize(&mut y) {
                break;
            }
            let r = rayleigh(layout, data, &y, &mut buf);
            if r > rho {
                let gain = r - rho;
                x.copy_from_slice(&y);
                rho = r;
                lo = lo.max(rho);
                if gain <= tol * half {
                    break;
                }
            } else {
                break;
            }
        }
        if success {
            std::mem::swap(&mut work, &mut at_hi);
            have_hi_factor = true;
            frac = T::lit(0.01);
        } else {
            frac = (frac * T::lit(8.0)).min(half);
        }
    }

    if have_hi_factor {
        for _ in 0..2 {
            y.copy_from_slice(&x);
            at_hi.solve(layout, &mut y);
            if !normalize(&mut y) {
                break;
            }
            let r = rayleigh(layout, data, &y, &mut buf);
            if r >= rho - tol {
                x.copy_from_slice(&y);
                rho = rho.max(r);
            }
        }
    }
    lo = lo.max(rho).min(hi);

    let gap = if want_gap {
        Some(second_gap(layout, data, lo, glo, tol, tiny, &mut work, &mut factorizations))
    } else {
        None
    };
    TopEigen {
        upper: hi,
        lower: lo,
        vector: x,
        gap,
        factorizations,
    }
}

/// Estimates lambda_1 - lambda_2 given lambda_1 ~ `top` (to within `tol`).
#[allow(clippy::too_many_arguments)]
fn second_gap<T: Real>(
    layout: &Layout,
    data: &[Cplx<T>],
    top: T,
    glo: T,
    tol: T,
    tiny: T,
    work: &mut Ldl<T>,
    factorizations: &mut usize,
) -> T {
    if layout.dim() < 2 {
        return T::infinity();
    }
    let mut above = |sigma: T, work: &mut Ldl<T>| {
        work.factor(layout, data, sigma, tiny);
        *factorizations += 1;
        work.negatives
    };
    let mut delta = tol * T::lit(4.0);
    if above(top - delta, work) >= 2 {
        return T::zero();
    }
    let floor = top - glo + tol;
    // lambda_2 <= top - delta; expand until the second eigenvalue is passed
    let mut inner = delta;
    loop {
        let next = (delta * T::lit(4.0)).min(floor);
        if above(top - next, work) >= 2 {
            delta = next;
            break;
        }
        inner = next;
        if next >= floor {
            return floor;
        }
        delta = next;
    }
    // lambda_2 in (top - delta, top - inner]
    let (mut a, mut b) = (inner, delta);
    for _ in 0..12 {
        if b - a <= T::lit(1e-3) * a {
            break;
        }
        let mid = (a + b) * T::lit(0.5);
        if above(top - mid, work) >= 2 {
            b = mid;
        } else {
            a = mid;
        }
    }
    a
}
