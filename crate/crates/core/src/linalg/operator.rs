use std::sync::Arc;

use num_traits::Zero;

use crate::error::{QfiError, Result};
use crate::scalar::{re, Cplx, Real};

/// Storage pattern of a Hermitian matrix.
///
/// `Dense` keeps every entry row-major. `Profile` keeps only the lower
/// envelope: row `i` stores columns `first[i]..=i`; the upper triangle is
/// implied by Hermiticity. Banded matrices are the common profile case, but
/// a few long rows (a GHZ projector's corner entry, say) are fine too because
/// Cholesky factors never leave the envelope.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Layout {
    Dense { n: usize },
    Profile { n: usize, first: Vec<usize>, start: Vec<usize> },
}

impl Layout {
    pub(crate) fn dense(n: usize) -> Self {
        Layout::Dense { n }
    }

    pub(crate) fn profile(first: Vec<usize>) -> Self {
        let n = first.len();
        let mut start = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for (i, &f) in first.iter().enumerate() {
            debug_assert!(f <= i);
            start.push(acc);
            acc += i - f + 1;
        }
        start.push(acc);
        Layout::Profile { n, first, start }
    }

    pub(crate) fn dim(&self) -> usize {
        match self {
            Layout::Dense { n } | Layout::Profile { n, .. } => *n,
        }
    }

    pub(crate) fn len(&self) -> usize {
        match self {
            Layout::Dense { n } => n * n,
            Layout::Profile { start, .. } => *start.last().unwrap_or(&0),
        }
    }

    pub(crate) fn is_dense(&self) -> bool {
        matches!(self, Layout::Dense { .. })
    }

    /// Index of entry (i, j) with j <= i, if it is stored.
    #[inline]
    pub(crate) fn lower_index(&self, i: usize, j: usize) -> Option<usize> {
        debug_assert!(j <= i);
        match self {
            Layout::Dense { n } => Some(i * n + j),
            Layout::Profile { first, start, .. } => {
                if j >= first[i] {
                    Some(start[i] + j - first[i])
                } else {
                    None
                }
            }
        }
    }

    #[inline]
    pub(crate) fn diag_index(&self, i: usize) -> usize {
        match self {
            Layout::Dense { n } => i * n + i,
            Layout::Profile { start, .. } => start[i + 1] - 1,
        }
    }

    /// First stored column of row `i` in the lower triangle.
    pub(crate) fn row_first(&self, i: usize) -> usize {
        match self {
            Layout::Dense { .. } => 0,
            Layout::Profile { first, .. } => first[i],
        }
    }

    /// Lower-envelope description of this layout (dense = full envelope).
    pub(crate) fn firsts(&self) -> Vec<usize> {
        match self {
            Layout::Dense { n } => vec![0; *n],
            Layout::Profile { first, .. } => first.clone(),
        }
    }

    /// Smallest layout containing both envelopes.
    pub(crate) fn union(&self, other: &Layout) -> Layout {
        if self.is_dense() || other.is_dense() {
            return Layout::dense(self.dim());
        }
        let first = self
            .firsts()
            .iter()
            .zip(other.firsts())
            .map(|(&a, b)| a.min(b))
            .collect();
        Layout::profile(first)
    }

    /// y = M x for the Hermitian matrix stored in `data`.
    pub(crate) fn matvec<T: Real>(&self, data: &[Cplx<T>], x: &[Cplx<T>], y: &mut [Cplx<T>]) {
        match self {
            Layout::Dense { n } => {
                for i in 0..*n {
                    let row = &data[i * n..(i + 1) * n];
                    let mut acc = Cplx::zero();
                    for (a, b) in row.iter().zip(x) {
                        acc += *a * *b;
                    }
                    y[i] = acc;
                }
            }
            Layout::Profile { n, first, start } => {
                for v in y.iter_mut() {
                    *v = Cplx::zero();
                }
                for i in 0..*n {
                    let f = first[i];
                    let row = &data[start[i]..start[i + 1]];
                    let mut acc = Cplx::zero();
                    // strictly lower part contributes to row i and (mirrored) to rows j
                    for (off, a) in row[..row.len() - 1].iter().enumerate() {
                        let j = f + off;
                        acc += *a * x[j];
                        y[j] += a.conj() * x[i];
                    }
                    acc += row[row.len() - 1] * x[i];
                    y[i] += acc;
                }
            }
        }
    }

    /// Gershgorin interval (lower, upper) enclosing the spectrum.
    pub(crate) fn gershgorin<T: Real>(&self, data: &[Cplx<T>]) -> (T, T) {
        let n = self.dim();
        let mut radius = vec![T::zero(); n];
        let mut diag = vec![T::zero(); n];
        match self {
            Layout::Dense { n } => {
                for i in 0..*n {
                    for j in 0..*n {
                        if i == j {
                            diag[i] = data[i * n + i].re;
                        } else {
                            radius[i] += data[i * n + j].norm();
                        }
                    }
                }
            }
            Layout::Profile { n, first, start } => {
                for i in 0..*n {
                    let f = first[i];
                    let row = &data[start[i]..start[i + 1]];
                    for (off, a) in row[..row.len() - 1].iter().enumerate() {
                        let m = a.norm();
                        radius[i] += m;
                        radius[f + off] += m;
                    }
                    diag[i] = row[row.len() - 1].re;
                }
            }
        }
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            lo = lo.min(diag[i] - radius[i]);
            hi = hi.max(diag[i] + radius[i]);
        }
        if n == 0 {
            (T::zero(), T::zero())
        } else {
            (lo, hi)
        }
    }
}

/// Dense-or-envelope self-adjoint matrix; the universal operand of the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T: Real> {
    layout: Arc<Layout>,
    data: Vec<Cplx<T>>,
    real: bool,
}

pub(crate) fn hermitian_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

impl<T: Real> HermitianOperator<T> {
    /// Builds an operator from a full row-major matrix. Entries must be
    /// finite and Hermitian to within 1e-12 (relative to the largest entry);
    /// the stored matrix is exactly Hermitian afterwards.
    pub fn from_dense(dim: usize, entries: Vec<Cplx<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(QfiError::InvalidInput("operator dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(QfiError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QfiError::InvalidInput("operator has non-finite entries".into()));
        }
        let scale = entries
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm()))
            .max(T::one());
        let tol = hermitian_tolerance::<T>() * scale;
        let mut sym = entries;
        for i in 0..dim {
            for j in 0..=i {
                let a = sym[i * dim + j];
                let b = sym[j * dim + i];
                if (a - b.conj()).norm() > tol {
                    return Err(QfiError::InvalidInput(format!(
                        "operator is not Hermitian at ({i}, {j})"
                    )));
                }
                let avg = (a + b.conj()) * T::lit(0.5);
                sym[i * dim + j] = avg;
                sym[j * dim + i] = avg.conj();
            }
            sym[i * dim + i].im = T::zero();
        }
        let real = sym.iter().all(|z| z.im == T::zero());
        Ok(Self {
            layout: Arc::new(Layout::dense(dim)),
            data: sym,
            real,
        }
        .compact())
    }

    /// Builds an operator from a real symmetric row-major matrix.
    pub fn from_real_dense(dim: usize, entries: &[T]) -> Result<Self> {
        Self::from_dense(dim, entries.iter().map(|&x| re(x)).collect())
    }

    /// Builds an operator from a closure over the lower triangle, restricted
    /// to the envelope `first` (row `i` covers columns `first[i]..=i`).
    /// Diagonal imaginary parts are discarded.
    pub(crate) fn from_profile_fn(
        first: Vec<usize>,
        mut f: impl FnMut(usize, usize) -> Cplx<T>,
    ) -> Self {
        let layout = Layout::profile(first);
        let n = layout.dim();
        let mut data = Vec::with_capacity(layout.len());
        for i in 0..n {
            for j in layout.row_first(i)..=i {
                let mut v = f(i, j);
                if i == j {
                    v.im = T::zero();
                }
                data.push(v);
            }
        }
        let real = data.iter().all(|z| z.im == T::zero());
        Self {
            layout: Arc::new(layout),
            data,
            real,
        }
    }

    pub fn diagonal(values: &[T]) -> Self {
        Self::from_profile_fn((0..values.len()).collect(), |i, _| re(values[i]))
    }

    /// Hermitian tridiagonal matrix with real diagonal and complex lower
    /// off-diagonal `lower[i] = M[i + 1][i]`.
    pub fn tridiagonal(diag: &[T], lower: &[Cplx<T>]) -> Self {
        assert_eq!(lower.len() + 1, diag.len().max(1));
        let first = (0..diag.len()).map(|i| i.saturating_sub(1)).collect();
        Self::from_profile_fn(first, |i, j| if i == j { re(diag[i]) } else { lower[j] })
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![T::one(); dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::diagonal(&vec![T::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// True when every entry has zero imaginary part.
    pub fn realness_hint(&self) -> bool {
        self.real
    }

    pub fn get(&self, i: usize, j: usize) -> Cplx<T> {
        if j <= i {
            self.layout
                .lower_index(i, j)
                .map_or(Cplx::zero(), |k| self.data[k])
        } else {
            match *self.layout {
                Layout::Dense { n } => self.data[i * n + j],
                _ => self.get(j, i).conj(),
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Cplx<T>> {
        let n = self.dim();
        if let Layout::Dense { .. } = *self.layout {
            return self.data.clone();
        }
        let mut out = vec![Cplx::zero(); n * n];
        for i in 0..n {
            for j in self.layout.row_first(i)..=i {
                let v = self.data[self.layout.lower_index(i, j).unwrap()];
                out[i * n + j] = v;
                out[j * n + i] = v.conj();
            }
        }
        out
    }

    /// Maximum distance of a stored entry from the diagonal.
    pub fn bandwidth(&self) -> usize {
        (0..self.dim())
            .map(|i| {
                let f = (self.layout.row_first(i)..i)
                    .find(|&j| self.get(i, j) != Cplx::zero())
                    .unwrap_or(i);
                i - f
            })
            .max()
            .unwrap_or(0)
    }

    /// Re-stores the matrix in the tightest lower envelope, or densely when
    /// the envelope fills more than half of the lower triangle.
    pub fn compact(self) -> Self {
        let n = self.dim();
        let first: Vec<usize> = (0..n)
            .map(|i| {
                (self.layout.row_first(i)..i)
                    .find(|&j| self.get(i, j) != Cplx::zero())
                    .unwrap_or(i)
            })
            .collect();
        let candidate = Layout::profile(first);
        let dense_lower = n * (n + 1) / 2;
        if n > 4 && candidate.len() * 2 <= dense_lower {
            if *self.layout == candidate {
                return self;
            }
            self.relayout(Arc::new(candidate))
        } else if self.layout.is_dense() {
            self
        } else {
            self.relayout(Arc::new(Layout::dense(n)))
        }
    }

    pub(crate) fn layout(&self) -> &Layout {
        &self.layout
    }

    pub(crate) fn data(&self) -> &[Cplx<T>] {
        &self.data
    }

    /// Entries arranged in `layout`, which must contain this operator's envelope.
    pub(crate) fn data_in(&self, layout: &Layout) -> Vec<Cplx<T>> {
        if *layout == *self.layout {
            return self.data.clone();
        }
        let n = self.dim();
        let mut out = vec![Cplx::zero(); layout.len()];
        match layout {
            Layout::Dense { .. } => out = self.to_dense(),
            Layout::Profile { .. } => {
                for i in 0..n {
                    for j in self.layout.row_first(i)..=i {
                        let v = self.data[self.layout.lower_index(i, j).unwrap()];
                        if let Some(k) = layout.lower_index(i, j) {
                            out[k] = v;
                        } else {
                            debug_assert!(v == Cplx::zero(), "entry outside target envelope");
                        }
                    }
                }
            }
        }
        out
    }

    fn relayout(self, layout: Arc<Layout>) -> Self {
        let data = self.data_in(&layout);
        Self {
            layout,
            data,
            real: self.real,
        }
    }

    pub(crate) fn from_layout_data(layout: Layout, data: Vec<Cplx<T>>) -> Self {
        let real = data.iter().all(|z| z.im == T::zero());
        Self {
            layout: Arc::new(layout),
            data,
            real,
        }
    }

    pub fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut y = vec![Cplx::zero(); self.dim()];
        self.layout.matvec(&self.data, x, &mut y);
        y
    }

    /// Real part of the trace.
    pub fn trace(&self) -> T {
        (0..self.dim())
            .map(|i| self.data[self.layout.diag_index(i)].re)
            .sum()
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z = *z * s;
        }
        out
    }

    /// self + s * other.
    pub fn add_scaled(&self, other: &Self, s: T) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(QfiError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let layout = self.layout.union(&other.layout);
        let mut a = self.data_in(&layout);
        let b = other.data_in(&layout);
        for (x, y) in a.iter_mut().zip(&b) {
            *x += *y * s;
        }
        Ok(Self::from_layout_data(layout, a))
    }

    /// self + s * identity.
    pub fn shifted(&self, s: T) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            let k = out.layout.diag_index(i);
            out.data[k].re += s;
        }
        out
    }

    /// Matrix square (Hermitian for any Hermitian input).
    pub fn square(&self) -> Self {
        let n = self.dim();
        match &*self.layout {
            Layout::Dense { .. } => {
                let d = &self.data;
                let mut out = vec![Cplx::zero(); n * n];
                for i in 0..n {
                    for k in 0..n {
                        let a = d[i * n + k];
                        if a == Cplx::zero() {
                            continue;
                        }
                        for j in 0..n {
                            out[i * n + j] += a * d[k * n + j];
                        }
                    }
                }
                for i in 0..n {
                    out[i * n + i].im = T::zero();
                }
                Self::from_layout_data(Layout::dense(n), out).compact()
            }
            Layout::Profile { first, .. } => {
                // full row extents: row i spans [first[i], last[i]]
                let mut last: Vec<usize> = (0..n).collect();
                for i in 0..n {
                    for j in first[i]..i {
                        last[j] = last[j].max(i);
                    }
                }
                let mut new_first = vec![0usize; n];
                for i in 0..n {
                    let fi = first[i];
                    new_first[i] = (0..=i).find(|&j| last[j] >= fi).unwrap_or(i);
                }
                let row = |i: usize, k: usize| self.get(i, k);
                Self::from_profile_fn(new_first, |i, j| {
                    let lo = first[i].max(first[j]);
                    let hi = last[i].min(last[j]);
                    let mut acc = Cplx::zero();
                    for k in lo..=hi {
                        acc += row(i, k) * row(j, k).conj();
                    }
                    acc
                })
                .compact()
            }
        }
    }

    /// Interval (lower, upper) enclosing the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        self.layout.gershgorin(&self.data)
    }

    pub fn max_abs_imag(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.im.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        let n = self.dim();
        let mut acc = T::zero();
        for i in 0..n {
            for j in self.layout.row_first(i)..=i {
                let v = self.data[self.layout.lower_index(i, j).unwrap()].norm_sqr();
                acc += if i == j { v } else { v + v };
            }
        }
        acc.sqrt()
    }

    /// Largest absolute entry; a cheap scale for tolerances.
    pub fn max_abs_entry(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl<T: Real> std::ops::Mul<T> for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;
    fn mul(self, s: T) -> HermitianOperator<T> {
        self.scaled(s)
    }
}

/// Row-major dense product helper used by tests and by the exact-QFI oracle.
pub fn dense_matmul<T: Real>(n: usize, a: &[Cplx<T>], b: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let mut out = vec![Cplx::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == Cplx::zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[k * n + j];
            }
        }
    }
    out
}
