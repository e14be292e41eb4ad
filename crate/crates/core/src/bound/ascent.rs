//! Maximization of a concave, possibly nonsmooth objective from values and
//! supergradients: quasi-Newton (BFGS) directions with a weak-Wolfe bracketing
//! line search. When the line search stalls at a kink, a gradient-sampling
//! step (minimum-norm combination of nearby supergradients) is tried first,
//! then a Nelder-Mead simplex. A proximal bundle phase polishes the result,
//! which matters where the optimum sits on a kink.

use crate::error::Result;
use crate::linalg::pseudo_random;
use crate::scalar::Real;

pub(crate) struct Probe<T: Real> {
    pub value: T,
    pub grad: Vec<T>,
}

pub(crate) struct AscentSettings<T: Real> {
    pub max_iters: usize,
    pub tol: T,
    /// Initial inverse-curvature scale.
    pub h0: T,
    /// Objective scale below which `tol` is taken relative to this floor.
    pub value_floor: T,
}

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome<T: Real> {
    pub x: Vec<T>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn matvec<T: Real>(h: &[T], v: &[T]) -> Vec<T> {
    let k = v.len();
    (0..k).map(|i| dot(&h[i * k..(i + 1) * k], v)).collect()
}

fn scaled_identity<T: Real>(k: usize, s: T) -> Vec<T> {
    let mut h = vec![T::zero(); k * k];
    for i in 0..k {
        h[i * k + i] = s;
    }
    h
}

struct Counter<'a, T: Real, F> {
    f: &'a mut F,
    evaluations: usize,
    _t: std::marker::PhantomData<T>,
}

impl<T: Real, F: FnMut(&[T]) -> Result<Probe<T>>> Counter<'_, T, F> {
    fn call(&mut self, x: &[T]) -> Result<Probe<T>> {
        self.evaluations += 1;
        (self.f)(x)
    }
}

pub(crate) fn maximize<T, F>(mut f: F, x0: Vec<T>, settings: &AscentSettings<T>) -> Result<AscentOutcome<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Probe<T>>,
{
    let k = x0.len();
    let mut ev = Counter {
        f: &mut f,
        evaluations: 0,
        _t: std::marker::PhantomData,
    };
    let mut x = x0;
    let mut p = ev.call(&x)?;
    let mut h = scaled_identity(k, settings.h0);
    let mut fresh = true;
    let mut first_update = true;
    let mut stall = 0;
    let mut fallbacks = 0;
    let mut converged = false;
    let mut iterations = 0;
    let tol_for = |v: T| settings.tol * v.abs().max(T::one());
    let polish_tol = |v: T| settings.tol * v.abs().max(settings.value_floor);

    while iterations < settings.max_iters {
        iterations += 1;
        if p.grad.iter().all(|g| *g == T::zero()) {
            converged = true;
            break;
        }
        let mut d = matvec(&h, &p.grad);
        if !(dot(&d, &p.grad) > T::zero()) {
            h = scaled_identity(k, settings.h0);
            fresh = true;
            first_update = true;
            d = matvec(&h, &p.grad);
        }
        match line_search(&mut ev, &x, &p, &d)? {
            Some((xn, pn)) => {
                let s: Vec<T> = xn.iter().zip(&x).map(|(a, b)| *a - *b).collect();
                let y: Vec<T> = p.grad.iter().zip(&pn.grad).map(|(a, b)| *a - *b).collect();
                let sy = dot(&s, &y);
                let gain = pn.value - p.value;
                if sy > T::epsilon() * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                    if first_update {
                        h = scaled_identity(k, sy / dot(&y, &y));
                        first_update = false;
                    }
                    bfgs_update(&mut h, &s, &y, sy);
                    fresh = false;
                }
                x = xn;
                p = pn;
                if gain <= tol_for(p.value) {
                    stall += 1;
                    if stall >= 2 {
                        // small gains can also mean a kink: check nearby supergradients
                        if let Some((xs, ps)) = gradient_sampling(&mut ev, &x, &p, settings.h0, 2)? {
                            if ps.value - p.value > tol_for(p.value) {
                                x = xs;
                                p = ps;
                                h = scaled_identity(k, settings.h0);
                                fresh = true;
                                first_update = true;
                                stall = 0;
                                continue;
                            }
                        }
                        converged = true;
                        break;
                    }
                } else {
                    stall = 0;
                }
            }
            None => {
                if !fresh {
                    h = scaled_identity(k, settings.h0);
                    fresh = true;
                    first_update = true;
                    continue;
                }
                if let Some((xs, ps)) = gradient_sampling(&mut ev, &x, &p, settings.h0, 8)? {
                    if ps.value - p.value > tol_for(p.value) {
                        x = xs;
                        p = ps;
                        h = scaled_identity(k, settings.h0);
                        fresh = true;
                        first_update = true;
                        stall = 0;
                        continue;
                    }
                }
                if fallbacks < 3 {
                    fallbacks += 1;
                    let step = matvec(&h, &p.grad)
                        .iter()
                        .map(|v| v.abs())
                        .fold(T::zero(), T::max)
                        .max(T::lit(1e-6) * settings.h0.sqrt());
                    let (xs, ps) = nelder_mead(&mut ev, &x, &p, step, settings.tol, 60 * (k + 1))?;
                    if ps.value - p.value > tol_for(p.value) {
                        x = xs;
                        p = ps;
                        h = scaled_identity(k, settings.h0);
                        fresh = true;
                        first_update = true;
                        continue;
                    }
                }
                converged = true;
                break;
            }
        }
    }
    let t0 = (0..k).map(|i| h[i * k + i]).fold(settings.h0, T::max);
    let budget = 40 * (k + 1);
    let (xb, pb, steps, done) = bundle_polish(&mut ev, x, p, t0, polish_tol, budget)?;
    Ok(AscentOutcome {
        x: xb,
        value: pb.value,
        iterations: iterations + steps,
        evaluations: ev.evaluations,
        converged: converged && done,
    })
}

/// Affine upper model `a + g.x` of the concave objective.
struct Cut<T: Real> {
    a: T,
    g: Vec<T>,
}

/// Minimizes `sum l_i e_i + t/2 |sum l_i g_i|^2` over the simplex by
/// pairwise exchanges of weight (exact line minimization per pair).
fn bundle_weights<T: Real>(cuts: &[Cut<T>], e: &[T], t: T) -> Vec<T> {
    let m = cuts.len();
    let gram: Vec<T> = (0..m * m).map(|ij| dot(&cuts[ij / m].g, &cuts[ij % m].g)).collect();
    // start from the cut with the smallest objective at a vertex
    let start = (0..m)
        .min_by(|&a, &b| {
            let fa = e[a] + t * gram[a * m + a] * T::lit(0.5);
            let fb = e[b] + t * gram[b * m + b] * T::lit(0.5);
            fa.partial_cmp(&fb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let mut lam = vec![T::zero(); m];
    lam[start] = T::one();
    let mut grad: Vec<T> = (0..m).map(|i| e[i] + t * gram[i * m + start]).collect();
    let scale = e.iter().chain(grad.iter()).fold(T::zero(), |a, v| a.max(v.abs())).max(T::min_positive_value());
    for _ in 0..200 * m * m + 100 {
        let i = (0..m)
            .filter(|&i| lam[i] > T::zero())
            .max_by(|&a, &b| grad[a].partial_cmp(&grad[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let j = (0..m)
            .min_by(|&a, &b| grad[a].partial_cmp(&grad[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let gap = grad[i] - grad[j];
        if i == j || !(gap > T::epsilon() * T::lit(4.0) * scale) {
            break;
        }
        let q = t * (gram[i * m + i] + gram[j * m + j] - T::lit(2.0) * gram[i * m + j]);
        let step = if q > T::zero() { (gap / q).min(lam[i]) } else { lam[i] };
        lam[i] -= step;
        lam[j] += step;
        for (l, g) in grad.iter_mut().enumerate() {
            *g += t * step * (gram[l * m + j] - gram[l * m + i]);
        }
    }
    lam
}

/// Proximal bundle method: cutting-plane model of the objective plus a
/// quadratic proximity term around the current center. Stops when the
/// model predicts less than `tol` gain, which also bounds the distance to
/// the optimum near kinks where single supergradients do not.
fn bundle_polish<T, F>(
    ev: &mut Counter<'_, T, F>,
    x0: Vec<T>,
    p0: Probe<T>,
    t0: T,
    tol: impl Fn(T) -> T,
    budget: usize,
) -> Result<(Vec<T>, Probe<T>, usize, bool)>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Probe<T>>,
{
    let k = x0.len();
    let cut = |x: &[T], p: &Probe<T>| Cut {
        a: p.value - dot(&p.grad, x),
        g: p.grad.clone(),
    };
    let max_cuts = 4 * k + 8;
    let mut cuts = vec![cut(&x0, &p0)];
    let (mut xc, mut pc) = (x0, p0);
    let mut t = t0;
    let mut steps = 0;
    for _ in 0..budget {
        let e: Vec<T> = cuts
            .iter()
            .map(|c| (c.a + dot(&c.g, &xc) - pc.value).max(T::zero()))
            .collect();
        let lam = bundle_weights(&cuts, &e, t);
        let g_agg: Vec<T> = (0..k).map(|j| cuts.iter().zip(&lam).map(|(c, l)| c.g[j] * *l).sum()).collect();
        let d: Vec<T> = g_agg.iter().map(|v| *v * t).collect();
        // gain promised by the aggregate cut, an upper bound on the model gain
        let e_agg: T = e.iter().zip(&lam).map(|(ei, l)| *ei * *l).sum();
        let predicted = e_agg + t * dot(&g_agg, &g_agg);
        if !(predicted > tol(pc.value)) {
            return Ok((xc, pc, steps, true));
        }
        let xn: Vec<T> = xc.iter().zip(&d).map(|(a, b)| *a + *b).collect();
        let pn = ev.call(&xn)?;
        if cuts.len() >= max_cuts {
            // keep the active cuts and fold the rest into their aggregate
            let a_agg = cuts.iter().zip(&lam).map(|(c, l)| c.a * *l).sum();
            let mut kept: Vec<Cut<T>> = cuts
                .into_iter()
                .zip(&lam)
                .filter(|(_, l)| **l > T::lit(1e-12))
                .map(|(c, _)| c)
                .collect();
            if kept.len() >= max_cuts {
                kept.drain(..kept.len() + 1 - max_cuts / 2);
            }
            kept.push(Cut { a: a_agg, g: g_agg });
            cuts = kept;
        }
        if pn.value.is_finite() {
            cuts.push(cut(&xn, &pn));
        }
        let gain = pn.value - pc.value;
        if gain >= T::lit(0.1) * predicted {
            if gain >= T::lit(0.5) * predicted {
                t = t * T::lit(2.0);
            }
            xc = xn;
            pc = pn;
            steps += 1;
        } else {
            t = (t * T::lit(0.7)).max(t0 * T::lit(1e-6));
        }
    }
    Ok((xc, pc, steps, false))
}

fn bfgs_update<T: Real>(h: &mut [T], s: &[T], y: &[T], sy: T) {
    let k = s.len();
    let rho = T::one() / sy;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    // H+ = H - rho (s hy^T + hy s^T) + (rho^2 yHy + rho) s s^T
    for i in 0..k {
        for j in 0..k {
            h[i * k + j] = h[i * k + j] - rho * (s[i] * hy[j] + hy[i] * s[j])
                + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Weak-Wolfe bracketing (Armijo decrease plus curvature) along ascent direction `d`.
fn line_search<T, F>(
    ev: &mut Counter<'_, T, F>,
    x: &[T],
    p: &Probe<T>,
    d: &[T],
) -> Result<Option<(Vec<T>, Probe<T>)>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Probe<T>>,
{
    let c1 = T::lit(1e-4);
    let c2 = T::lit(0.9);
    let slope = dot(&p.grad, d);
    let (mut lo, mut hi) = (T::zero(), T::infinity());
    let mut t = T::one();
    let mut fallback: Option<(Vec<T>, Probe<T>)> = None;
    for _ in 0..60 {
        let xt: Vec<T> = x.iter().zip(d).map(|(a, b)| *a + *b * t).collect();
        let pt = ev.call(&xt)?;
        if !(pt.value >= p.value + c1 * t * slope) || !pt.value.is_finite() {
            hi = t;
        } else if dot(&pt.grad, d) > c2 * slope {
            lo = t;
            let better = fallback.as_ref().is_none_or(|(_, q)| pt.value > q.value);
            if better {
                fallback = Some((xt, pt));
            }
        } else {
            return Ok(Some((xt, pt)));
        }
        t = if hi.is_finite() {
            (lo + hi) * T::lit(0.5)
        } else {
            lo * T::lit(2.0)
        };
        if hi.is_finite() && hi - lo <= T::epsilon() * T::lit(64.0) * hi {
            break;
        }
        if !hi.is_finite() && t > T::lit(1e12) {
            break;
        }
    }
    Ok(fallback.filter(|(_, q)| q.value > p.value))
}

/// Minimum-norm point of the convex hull of `g` (projected gradient on the
/// simplex of weights).
fn min_norm_combination<T: Real>(g: &[Vec<T>]) -> Vec<T> {
    let m = g.len();
    let k = g[0].len();
    let gram: Vec<T> = (0..m * m).map(|ij| dot(&g[ij / m], &g[ij % m])).collect();
    let lip = (0..m).map(|i| gram[i * m + i]).sum::<T>().max(T::min_positive_value());
    let mut lam = vec![T::one() / T::from_usize_lossy(m); m];
    for _ in 0..500 {
        let grad: Vec<T> = (0..m).map(|i| dot(&gram[i * m..(i + 1) * m], &lam)).collect();
        let y: Vec<T> = lam.iter().zip(&grad).map(|(l, q)| *l - *q / lip).collect();
        lam = project_simplex(&y);
    }
    (0..k)
        .map(|j| g.iter().zip(&lam).map(|(gi, l)| gi[j] * *l).sum())
        .collect()
}

fn project_simplex<T: Real>(y: &[T]) -> Vec<T> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (i, ui) in u.iter().enumerate() {
        cum += *ui;
        let t = (cum - T::one()) / T::from_usize_lossy(i + 1);
        if *ui - t > T::zero() {
            theta = t;
        }
    }
    y.iter().map(|v| (*v - theta).max(T::zero())).collect()
}

/// Gradient sampling: supergradients at points scattered around `x` are
/// combined into their minimum-norm element, an ascent direction even where
/// a single supergradient is not. The radius shrinks tenfold per round
/// until a step succeeds.
fn gradient_sampling<T, F>(
    ev: &mut Counter<'_, T, F>,
    x: &[T],
    p: &Probe<T>,
    h0: T,
    rounds: usize,
) -> Result<Option<(Vec<T>, Probe<T>)>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Probe<T>>,
{
    let k = x.len();
    let xnorm = x.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let scale = xnorm.max(h0.sqrt()).max(T::one());
    let mut radius = T::lit(1e-3) * scale;
    let mut seed = 0;
    for _ in 0..rounds {
        let mut grads = vec![p.grad.clone()];
        for _ in 0..2 * k + 2 {
            let u: Vec<T> = (0..k)
                .map(|j| {
                    seed += 1;
                    pseudo_random::<T>(seed * 7919 + j)
                })
                .collect();
            let un = dot(&u, &u).sqrt().max(T::min_positive_value());
            let xs: Vec<T> = x.iter().zip(&u).map(|(a, b)| *a + *b / un * radius).collect();
            grads.push(ev.call(&xs)?.grad);
        }
        let d = min_norm_combination(&grads);
        let dd = dot(&d, &d);
        if dd > T::zero() {
            let mut t = h0.max(T::one());
            let mut best: Option<(Vec<T>, Probe<T>)> = None;
            for _ in 0..60 {
                let xt: Vec<T> = x.iter().zip(&d).map(|(a, b)| *a + *b * t).collect();
                let pt = ev.call(&xt)?;
                if pt.value.is_finite() && pt.value >= p.value + T::lit(1e-4) * t * dd {
                    best = Some((xt, pt));
                    break;
                }
                t = t * T::lit(0.5);
            }
            if let Some((mut xb, mut pb)) = best {
                // expand while the objective keeps rising
                for _ in 0..30 {
                    t = t * T::lit(2.0);
                    let xt: Vec<T> = x.iter().zip(&d).map(|(a, b)| *a + *b * t).collect();
                    let pt = ev.call(&xt)?;
                    if !(pt.value > pb.value) {
                        break;
                    }
                    xb = xt;
                    pb = pt;
                }
                return Ok(Some((xb, pb)));
            }
        }
        radius = radius * T::lit(0.1);
    }
    Ok(None)
}

/// Derivative-free simplex search started around `x`.
fn nelder_mead<T, F>(
    ev: &mut Counter<'_, T, F>,
    x: &[T],
    p0: &Probe<T>,
    step: T,
    tol: T,
    budget: usize,
) -> Result<(Vec<T>, Probe<T>)>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Probe<T>>,
{
    let k = x.len();
    let mut simplex: Vec<(Vec<T>, Probe<T>)> = Vec::with_capacity(k + 1);
    simplex.push((
        x.to_vec(),
        Probe {
            value: p0.value,
            grad: p0.grad.clone(),
        },
    ));
    for i in 0..k {
        let mut xi = x.to_vec();
        xi[i] += step;
        let pi = ev.call(&xi)?;
        simplex.push((xi, pi));
    }
    let half = T::lit(0.5);
    let mut used = k;
    while used < budget {
        simplex.sort_by(|a, b| b.1.value.partial_cmp(&a.1.value).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[0].1.value - simplex[k].1.value;
        if spread <= tol * simplex[0].1.value.abs().max(T::one()) {
            break;
        }
        let mut centroid = vec![T::zero(); k];
        for (xs, _) in &simplex[..k] {
            for (c, v) in centroid.iter_mut().zip(xs) {
                *c += *v / T::from_usize_lossy(k);
            }
        }
        let worst = simplex[k].0.clone();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| *c + (*c - *w) * t)
                .collect()
        };
        let xr = along(T::one());
        let pr = ev.call(&xr)?;
        used += 1;
        if pr.value > simplex[0].1.value {
            let xe = along(T::lit(2.0));
            let pe = ev.call(&xe)?;
            used += 1;
            simplex[k] = if pe.value > pr.value { (xe, pe) } else { (xr, pr) };
        } else if pr.value > simplex[k - 1].1.value {
            simplex[k] = (xr, pr);
        } else {
            let xc = along(-half);
            let pc = ev.call(&xc)?;
            used += 1;
            if pc.value > simplex[k].1.value {
                simplex[k] = (xc, pc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let xs: Vec<T> = best
                        .iter()
                        .zip(&item.0)
                        .map(|(b, v)| *b + (*v - *b) * half)
                        .collect();
                    let ps = ev.call(&xs)?;
                    used += 1;
                    *item = (xs, ps);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.value.partial_cmp(&a.1.value).unwrap_or(std::cmp::Ordering::Equal));
    Ok(simplex.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> AscentSettings<f64> {
        AscentSettings {
            max_iters: 500,
            tol: 1e-12,
            h0: 1.0,
            value_floor: 1.0,
        }
    }

    #[test]
    fn maximizes_concave_quadratic() {
        let f = |x: &[f64]| -> Result<Probe<f64>> {
            let (a, b) = (x[0] - 1.0, x[1] + 2.0);
            Ok(Probe {
                value: -(3.0 * a * a + a * b + b * b),
                grad: vec![-(6.0 * a + b), -(a + 2.0 * b)],
            })
        };
        let out = maximize(f, vec![0.0, 0.0], &settings()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] + 2.0).abs() < 1e-5);
        assert!(out.converged);
    }

    #[test]
    fn handles_kinked_objective() {
        // -|x| - 2|y - 1| + y: maximum 1 at (0, 1)
        let f = |x: &[f64]| -> Result<Probe<f64>> {
            let sx = if x[0] > 0.0 { -1.0 } else { 1.0 };
            let sy = if x[1] > 1.0 { -2.0 } else { 2.0 };
            Ok(Probe {
                value: -x[0].abs() - 2.0 * (x[1] - 1.0).abs() + x[1],
                grad: vec![sx, sy + 1.0],
            })
        };
        let out = maximize(f, vec![0.7, -0.4], &settings()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-6, "{}", out.value);
    }

    #[test]
    fn min_norm_point_of_hull() {
        let d = min_norm_combination(&[vec![1.0_f64, 1.0], vec![1.0, -1.0]]);
        assert!((d[0] - 1.0).abs() < 1e-9 && d[1].abs() < 1e-9);
        let d = min_norm_combination(&[vec![2.0_f64, 0.0], vec![-1.0, 0.0]]);
        assert!(d[0].abs() < 1e-9);
    }

    #[test]
    fn escapes_kink_where_supergradient_misleads() {
        // min(3x + y, -3x + y, 1 - y): at the origin the first plane's
        // gradient (3, 1) is not an ascent direction; the maximum is 1/2 at (0, 1/2)
        let f = |x: &[f64]| -> Result<Probe<f64>> {
            let planes = [(0.0, [3.0, 1.0]), (0.0, [-3.0, 1.0]), (1.0, [0.0, -1.0])];
            let vals: Vec<f64> = planes.iter().map(|(c, g)| c + g[0] * x[0] + g[1] * x[1]).collect();
            let i = (0..3).min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap()).unwrap();
            Ok(Probe {
                value: vals[i],
                grad: planes[i].1.to_vec(),
            })
        };
        let out = maximize(f, vec![0.0, 0.0], &settings()).unwrap();
        assert!((out.value - 0.5).abs() < 1e-6, "{}", out.value);
    }
}
