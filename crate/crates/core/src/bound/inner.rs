//! The inner supremum over mu of `lambda_max(C + 8 mu A - 4 mu^2)`, where
//! `C = sum_k r_k W_k - 4 A^2`.
//!
//! `h(mu) = lambda_max(C + 8 mu A)` is convex in mu, so on any cell the chord
//! of `h` minus `4 mu^2` bounds the objective from above. That turns a grid
//! scan into a certified enclosure of the supremum via branch and bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_traits::Zero;
use rayon::prelude::*;

use super::blocks::{embed, project};
use crate::linalg::{default_eig_tol, top_eigen_raw, HermitianOperator, Layout, TopEigen};
use crate::scalar::{Cplx, Real};

/// Operators of one bound problem stored in a shared layout.
pub(crate) struct Inner<T: Real> {
    pub layout: Layout,
    pub a: Vec<Cplx<T>>,
    pub base: Vec<Cplx<T>>,
    pub ws: Vec<Vec<Cplx<T>>>,
    pub mu_lo: T,
    pub mu_hi: T,
    /// Invariant blocks; when present, `C` is stored block by block.
    blocks: Vec<Block<T>>,
}

/// One invariant subspace with the problem's operators restricted to it.
struct Block<T: Real> {
    d: usize,
    offset: usize,
    basis: Vec<Cplx<T>>,
    a: Vec<Cplx<T>>,
    base: Vec<Cplx<T>>,
    ws: Vec<Vec<Cplx<T>>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Peak<T: Real> {
    pub mu: T,
    pub value: T,
    pub vector: Vec<Cplx<T>>,
}

#[derive(Debug, Clone)]
pub(crate) struct InnerSup<T: Real> {
    pub best: Peak<T>,
    /// Every evaluated grid point (mu, upper value of lambda_max).
    pub grid: Vec<(T, T)>,
}

impl<T: Real> Inner<T> {
    /// `ws` are the constraint operators after subtracting `centers` times the identity.
    pub fn new(
        generator: &HermitianOperator<T>,
        observables: &[&HermitianOperator<T>],
        centers: &[T],
        mu_interval: (T, T),
    ) -> Self {
        let a2 = generator.square();
        let mut layout = generator.layout().union(a2.layout());
        for w in observables {
            layout = layout.union(w.layout());
        }
        let a = generator.data_in(&layout);
        let mut base = a2.data_in(&layout);
        for z in &mut base {
            *z = *z * T::lit(-4.0);
        }
        let ws = observables
            .iter()
            .zip(centers)
            .map(|(w, &c)| w.shifted(-c).data_in(&layout))
            .collect();
        Self {
            layout,
            a,
            base,
            ws,
            mu_lo: mu_interval.0,
            mu_hi: mu_interval.1,
            blocks: Vec::new(),
        }
    }

    /// Restricts every evaluation to the given invariant subspaces
    /// (orthonormal row-major `dim x d` bases that together span the space).
    pub fn with_blocks(
        mut self,
        generator: &HermitianOperator<T>,
        observables: &[&HermitianOperator<T>],
        centers: &[T],
        bases: Vec<Vec<Cplx<T>>>,
    ) -> Self {
        let dim = generator.dim();
        let a2 = generator.square();
        let mut offset = 0;
        self.blocks = bases
            .into_iter()
            .map(|basis| {
                let d = basis.len() / dim;
                let base = project(&a2, &basis).into_iter().map(|z| z * T::lit(-4.0)).collect();
                let ws = observables
                    .iter()
                    .zip(centers)
                    .map(|(w, &c)| project(&w.shifted(-c), &basis))
                    .collect();
                let block = Block {
                    d,
                    offset,
                    a: project(generator, &basis),
                    basis,
                    base,
                    ws,
                };
                offset += d * d;
                block
            })
            .collect();
        self
    }

    pub fn c_matrix(&self, r: &[T]) -> Vec<Cplx<T>> {
        if !self.blocks.is_empty() {
            let mut c = Vec::new();
            for b in &self.blocks {
                let mut part = b.base.clone();
                for (w, &rk) in b.ws.iter().zip(r) {
                    for (x, y) in part.iter_mut().zip(w) {
                        *x += *y * rk;
                    }
                }
                c.extend(part);
            }
            return c;
        }
        let mut c = self.base.clone();
        for (w, &rk) in self.ws.iter().zip(r) {
            if rk == T::zero() {
                continue;
            }
            for (x, y) in c.iter_mut().zip(w) {
                *x += *y * rk;
            }
        }
        c
    }

    /// Top eigenpair of `C + 8 mu A - 4 mu^2`.
    pub fn eval(
        &self,
        c: &[Cplx<T>],
        mu: T,
        warm: Option<&[Cplx<T>]>,
        want_gap: bool,
    ) -> TopEigen<T> {
        let eight_mu = mu * T::lit(8.0);
        let shift = T::lit(4.0) * mu * mu;
        if !self.blocks.is_empty() {
            return self.eval_blocks(c, eight_mu, shift, want_gap);
        }
        let mut m: Vec<Cplx<T>> = c
            .iter()
            .zip(&self.a)
            .map(|(x, y)| *x + *y * eight_mu)
            .collect();
        for i in 0..self.layout.dim() {
            m[self.layout.diag_index(i)].re -= shift;
        }
        top_eigen_raw(&self.layout, &m, warm, want_gap, default_eig_tol())
    }

    fn eval_blocks(&self, c: &[Cplx<T>], eight_mu: T, shift: T, want_gap: bool) -> TopEigen<T> {
        let tops: Vec<TopEigen<T>> = self
            .blocks
            .iter()
            .map(|b| {
                let mut m: Vec<Cplx<T>> = c[b.offset..b.offset + b.d * b.d]
                    .iter()
                    .zip(&b.a)
                    .map(|(x, y)| *x + *y * eight_mu)
                    .collect();
                for i in 0..b.d {
                    m[i * b.d + i].re -= shift;
                }
                top_eigen_raw(&Layout::Dense { n: b.d }, &m, None, want_gap, default_eig_tol())
            })
            .collect();
        let (best, top) = tops
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.lower.partial_cmp(&y.1.lower).unwrap_or(Ordering::Equal))
            .expect("at least one block");
        let upper = tops.iter().fold(top.upper, |m, t| m.max(t.upper));
        let gap = top.gap.map(|g| {
            let others = tops
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != best)
                .fold(top.lower - g, |m, (_, t)| m.max(t.upper));
            (top.lower - others).max(T::zero())
        });
        TopEigen {
            upper,
            lower: top.lower,
            vector: embed(&self.blocks[best].basis, &top.vector),
            gap,
            factorizations: tops.iter().map(|t| t.factorizations).sum(),
        }
    }

    pub fn grid(&self, points: usize) -> Vec<T> {
        let (lo, hi) = (self.mu_lo, self.mu_hi);
        if points < 2 || hi <= lo {
            return vec![lo];
        }
        let step = (hi - lo) / T::from_usize_lossy(points - 1);
        (0..points)
            .map(|i| {
                if i + 1 == points {
                    hi
                } else {
                    lo + step * T::from_usize_lossy(i)
                }
            })
            .collect()
    }

    /// Evaluates the grid in parallel chunks, warm-starting within each chunk.
    fn scan(&self, c: &[Cplx<T>], mus: &[T]) -> Vec<TopEigen<T>> {
        let chunks = rayon::current_num_threads().max(1);
        let size = mus.len().div_ceil(chunks).max(1);
        mus.par_chunks(size)
            .flat_map_iter(|chunk| {
                let mut out: Vec<TopEigen<T>> = Vec::with_capacity(chunk.len());
                for &mu in chunk {
                    let warm = out.last().map(|t| t.vector.clone());
                    out.push(self.eval(c, mu, warm.as_deref(), false));
                }
                out
            })
            .collect()
    }

    /// Grid scan, then golden-section refinement of the three highest local maxima.
    pub fn sup(&self, c: &[Cplx<T>], grid_points: usize, refine_iters: usize) -> InnerSup<T> {
        let mus = self.grid(grid_points);
        let tops = self.scan(c, &mus);
        let values: Vec<T> = tops.iter().map(|t| t.upper).collect();
        let n = values.len();
        let mut maxima: Vec<usize> = (0..n)
            .filter(|&i| {
                (i == 0 || values[i] >= values[i - 1]) && (i + 1 == n || values[i] >= values[i + 1])
            })
            .collect();
        maxima.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(Ordering::Equal));
        maxima.truncate(3);

        let refined: Vec<(Peak<T>, usize)> = maxima
            .par_iter()
            .map(|&i| {
                let lo = mus[i.saturating_sub(1)];
                let hi = mus[(i + 1).min(n - 1)];
                self.golden(c, lo, hi, refine_iters, mus[i], &tops[i])
            })
            .collect();
        let mut best = Peak {
            mu: mus[maxima[0]],
            value: values[maxima[0]],
            vector: tops[maxima[0]].vector.clone(),
        };
        for (p, _) in refined {
            if p.value > best.value {
                best = p;
            }
        }
        InnerSup {
            best,
            grid: mus.into_iter().zip(values).collect(),
        }
    }

    fn golden(
        &self,
        c: &[Cplx<T>],
        mut a: T,
        mut b: T,
        iters: usize,
        mu0: T,
        top0: &TopEigen<T>,
    ) -> (Peak<T>, usize) {
        let mut best = Peak {
            mu: mu0,
            value: top0.upper,
            vector: top0.vector.clone(),
        };
        if b <= a || iters == 0 {
            return (best, 0);
        }
        let gr = T::lit(0.618_033_988_749_894_9);
        let mut evals = 0;
        let mut warm = top0.vector.clone();
        let mut probe = |mu: T, warm: &mut Vec<Cplx<T>>, best: &mut Peak<T>| -> T {
            let t = self.eval(c, mu, Some(warm), false);
            evals += 1;
            if t.upper > best.value {
                *best = Peak {
                    mu,
                    value: t.upper,
                    vector: t.vector.clone(),
                };
            }
            *warm = t.vector;
            t.upper
        };
        let mut x1 = b - gr * (b - a);
        let mut x2 = a + gr * (b - a);
        let mut f1 = probe(x1, &mut warm, &mut best);
        let mut f2 = probe(x2, &mut warm, &mut best);
        let resolution = T::epsilon() * T::lit(16.0) * (a.abs() + b.abs() + (self.mu_hi - self.mu_lo));
        for _ in 0..iters {
            if b - a <= resolution {
                break;
            }
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = probe(x2, &mut warm, &mut best);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = probe(x1, &mut warm, &mut best);
            }
        }
        (best, evals)
    }

    /// Certified upper bound on the supremum, starting from evaluated grid
    /// points and the best value seen. Returns (upper bound, evaluations).
    pub fn certify(&self, c: &[Cplx<T>], grid: &[(T, T)], best: T, eps: T, budget: usize) -> (T, usize) {
        let four = T::lit(4.0);
        // h(mu) = f(mu) + 4 mu^2 is convex
        let chord_max = |a: T, fa: T, b: T, fb: T| -> T {
            let (ha, hb) = (fa + four * a * a, fb + four * b * b);
            let slope = (hb - ha) / (b - a);
            let v = (slope / T::lit(8.0)).max(a).min(b);
            ha + slope * (v - a) - four * v * v
        };
        let mut best = grid.iter().fold(best, |m, &(_, f)| m.max(f));
        let mut heap: BinaryHeap<Cell<T>> = grid
            .windows(2)
            .filter(|w| w[1].0 > w[0].0)
            .map(|w| Cell {
                upper: chord_max(w[0].0, w[0].1, w[1].0, w[1].1),
                a: w[0],
                b: w[1],
            })
            .collect();
        let mut evals = 0;
        while let Some(cell) = heap.pop() {
            if cell.upper <= best + eps {
                return (best.max(cell.upper), evals);
            }
            let mid = (cell.a.0 + cell.b.0) * T::lit(0.5);
            if evals >= budget || mid <= cell.a.0 || mid >= cell.b.0 {
                return (best.max(cell.upper), evals);
            }
            let fm = self.eval(c, mid, None, false).upper;
            evals += 1;
            best = best.max(fm);
            for (lo, hi) in [(cell.a, (mid, fm)), ((mid, fm), cell.b)] {
                heap.push(Cell {
                    upper: chord_max(lo.0, lo.1, hi.0, hi.1),
                    a: lo,
                    b: hi,
                });
            }
        }
        (best, evals)
    }
}

struct Cell<T: Real> {
    upper: T,
    a: (T, T),
    b: (T, T),
}

impl<T: Real> PartialEq for Cell<T> {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}

impl<T: Real> Eq for Cell<T> {}

impl<T: Real> PartialOrd for Cell<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Cell<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.partial_cmp(&other.upper).unwrap_or(Ordering::Equal)
    }
}

/// `<psi| X |psi>` for aligned data.
pub(crate) fn expect_aligned<T: Real>(layout: &Layout, data: &[Cplx<T>], psi: &[Cplx<T>]) -> T {
    let mut buf = vec![Cplx::zero(); psi.len()];
    layout.matvec(data, psi, &mut buf);
    psi.iter().zip(&buf).map(|(a, b)| (a.conj() * b).re).sum()
}
