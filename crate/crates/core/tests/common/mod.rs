//! Dense reference computations on top of nalgebra, independent of the
//! crate's own eigensolvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use qfi_core::{Density, Operator};

pub fn dense(op: &Operator) -> DMatrix<Complex64> {
    let n = op.dim();
    DMatrix::from_row_slice(n, n, &op.to_dense())
}

pub fn dense_rho(rho: &Density) -> DMatrix<Complex64> {
    let n = rho.dim();
    DMatrix::from_row_slice(n, n, rho.entries())
}

pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn lambda_max(m: &DMatrix<Complex64>) -> f64 {
    *eigenvalues(m).last().unwrap()
}

/// `2 sum (l_i - l_j)^2 / (l_i + l_j) |<i|A|j>|^2`.
pub fn qfi(rho: &Density, a: &Operator) -> f64 {
    let eig = SymmetricEigen::new(dense_rho(rho));
    let v = &eig.eigenvectors;
    let av = dense(a) * v;
    let n = rho.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (eig.eigenvalues[i].max(0.0), eig.eigenvalues[j].max(0.0));
            if li + lj < 1e-13 {
                continue;
            }
            let elem: Complex64 = v.column(i).dotc(&av.column(j));
            total += (li - lj).powi(2) / (li + lj) * elem.norm_sqr();
        }
    }
    2.0 * total
}

pub fn expectation(op: &Operator, rho: &Density) -> f64 {
    (dense(op) * dense_rho(rho)).trace().re
}

/// `sup_mu lambda_max(W - 4 (A - mu)^2)` by a dense grid over the spectrum
/// of `A` and golden-section polishing of the best few cells.
pub fn legendre(w: &Operator, a: &Operator) -> f64 {
    let (wd, ad) = (dense(w), dense(a));
    let n = ad.nrows();
    let spectrum = eigenvalues(&ad);
    let (lo, hi) = (spectrum[0], spectrum[n - 1]);
    let eye = DMatrix::<Complex64>::identity(n, n);
    let f = |mu: f64| {
        let shifted = &ad - &eye * Complex64::new(mu, 0.0);
        lambda_max(&(&wd - (&shifted * &shifted) * Complex64::new(4.0, 0.0)))
    };
    let points = 1201;
    let grid: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&m| f(m)).collect();
    let mut order: Vec<usize> = (0..points).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = values[order[0]];
    for &i in order.iter().take(4) {
        let (mut a, mut b) = (grid[i] - step, grid[i] + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.max(f(0.5 * (a + b)));
    }
    best
}

/// Dual objective `sum r_k w_k - legendre(sum r_k W_k)`.
pub fn dual_objective(observables: &[&Operator], values: &[f64], a: &Operator, r: &[f64]) -> f64 {
    let mut w = Operator::zeros(a.dim());
    for (op, &rk) in observables.iter().zip(r) {
        w = w.add_scaled(op, rk).unwrap();
    }
    r.iter().zip(values).map(|(x, y)| x * y).sum::<f64>() - legendre(&w, a)
}

/// `C(n, n/2) / 2^n` by a running product.
pub fn central_binomial_weight(n: usize) -> f64 {
    (1..=n / 2).fold(1.0, |acc, k| acc * (n / 2 + k) as f64 / k as f64 / 4.0)
}
