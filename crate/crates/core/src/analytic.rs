//! Closed-form bounds and semi-analytic scans: GHZ fidelity bound, Dicke
//! fidelity thresholds, the archetypical squeezing bound, boundary states of
//! the (<J_z>, <J_x^2>) plane and the `<J_x> = 0` reduction check.

use serde::Serialize;

use crate::bound::{lower_bound_multi, lower_bound_single, BoundProblem, BoundResult, Constraint, OptimizerSettings};
use crate::error::{QfiError, Result};
use crate::linalg::{expectation, lambda_max_with_gap, variance};
use crate::random::{random_density_matrix, rng_from_seed};
use crate::spin::{
    build_collective, dicke_state, ghz_state, ln_binomial, projector, Representation,
    RepresentationKind,
};

fn check_fidelity(f: f64) -> Result<()> {
    if f.is_nan() {
        Err(QfiError::InvalidInput("fidelity is NaN".into()))
    } else if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(QfiError::Infeasible(format!("fidelity {f} is outside [0, 1]")))
    }
}

/// Optimal QFI bound (generator `J_z`) from the GHZ fidelity: `N^2 (1 - 2F)^2` above 1/2, else 0.
pub fn ghz_bound(f: f64, n: usize) -> Result<f64> {
    check_fidelity(f)?;
    let nn = (n * n) as f64;
    Ok(if f > 0.5 { nn * (1.0 - 2.0 * f).powi(2) } else { 0.0 })
}

/// Derivative of [`ghz_bound`] with respect to the fidelity.
pub fn ghz_bound_derivative(f: f64, n: usize) -> f64 {
    let nn = (n * n) as f64;
    if f > 0.5 {
        -4.0 * nn * (1.0 - 2.0 * f)
    } else {
        0.0
    }
}

/// Closed form of `sup_mu lambda_max(r |GHZ><GHZ| - 4 (J_z - mu)^2)`.
pub fn ghz_legendre_closed(r: f64, n: usize) -> f64 {
    let nn = (n * n) as f64;
    if r < 0.0 {
        0.0
    } else if r <= 4.0 * nn {
        r / 2.0 + r * r / (16.0 * nn)
    } else {
        r - nn
    }
}

/// Dicke fidelity of the y-polarized product state, `C(N, N/2) / 2^N`;
/// below it the fidelity certifies nothing.
pub fn dicke_threshold(n: usize) -> Result<f64> {
    if n == 0 || n % 2 == 1 {
        return Err(QfiError::Domain(format!("Dicke threshold needs an even qubit number, got {n}")));
    }
    Ok((ln_binomial(n, n / 2) - n as f64 * std::f64::consts::LN_2).exp())
}

/// `|<D_N^{N/2}| D_N^{m}>_y|^2`: overlap of the half-excited Dicke state with
/// the Dicke state of `m` excitations along y.
pub fn dicke_y_overlap(n: usize, m: usize) -> Result<f64> {
    if n % 2 == 1 || m > n {
        return Err(QfiError::Domain(format!("overlap needs even N and m <= N, got N={n}, m={m}")));
    }
    if m % 2 == 1 {
        return Ok(0.0);
    }
    let ln = 2.0 * ln_binomial(n / 2, m / 2) + ln_binomial(n, n / 2)
        - n as f64 * std::f64::consts::LN_2
        - ln_binomial(n, m);
    Ok(ln.exp())
}

/// The archetypical squeezing bound `<J_z>^2 / Var(J_x)`.
pub fn archetype_bound(jz: f64, var_jx: f64) -> Result<f64> {
    if !(var_jx > 0.0) {
        return Err(QfiError::Domain(format!("variance {var_jx} must be positive")));
    }
    Ok(jz * jz / var_jx)
}

/// Numeric GHZ fidelity bound (generator `J_z`).
pub fn ghz_fidelity_bound(
    n: usize,
    fidelity: f64,
    kind: RepresentationKind,
    settings: &OptimizerSettings,
) -> Result<BoundResult<f64>> {
    check_fidelity(fidelity)?;
    let rep = Representation::new(kind, n)?;
    let spins = build_collective::<f64>(rep);
    let w = projector(&ghz_state::<f64>(rep));
    lower_bound_single(&w, fidelity, &spins.jz, n, kind, settings)
}

/// Numeric Dicke fidelity bound (generator `J_y`, symmetric representation, even N).
pub fn dicke_fidelity_bound(n: usize, fidelity: f64, settings: &OptimizerSettings) -> Result<BoundResult<f64>> {
    check_fidelity(fidelity)?;
    if n % 2 == 1 {
        return Err(QfiError::Domain(format!("Dicke target needs an even qubit number, got {n}")));
    }
    let rep = Representation::symmetric(n)?;
    let spins = build_collective::<f64>(rep);
    let w = projector(&dicke_state::<f64>(rep, n / 2)?);
    lower_bound_single(&w, fidelity, &spins.jy, n, RepresentationKind::Symmetric, settings)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub fidelity: f64,
    pub bound: f64,
    pub bound_per_n2: f64,
    pub iterations: usize,
}

/// Dicke fidelity bounds over increasing N, each run warm-started from the
/// previous multiplier rescaled by `(N / N_prev)^2`.
pub fn dicke_scaling_scan(ns: &[usize], fidelity: f64, settings: &OptimizerSettings) -> Result<Vec<ScalingPoint>> {
    let mut out = Vec::with_capacity(ns.len());
    let mut prev: Option<(usize, f64)> = None;
    for &n in ns {
        let mut s = settings.clone();
        if let Some((pn, r)) = prev {
            let ratio = n as f64 / pn as f64;
            s.r_init = vec![r * ratio * ratio];
        }
        let res = dicke_fidelity_bound(n, fidelity, &s)?;
        prev = Some((n, res.r_opt[0]));
        out.push(ScalingPoint {
            n,
            fidelity,
            bound: res.bound,
            bound_per_n2: res.bound / (n * n) as f64,
            iterations: res.iterations,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySign {
    /// Ground states of `+J_x^2 - mu J_z`: the lower boundary (squeezed side).
    Plus,
    /// Ground states of `-J_x^2 - mu J_z`: the upper boundary.
    Minus,
}

#[derive(Debug, Clone)]
pub struct BoundaryOptions {
    /// Odd N on the plus branch is refused below this mu, where the ground
    /// states stop being extremal.
    pub odd_mu_floor: f64,
    /// Relative gap below which a ground state counts as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        Self {
            odd_mu_floor: 1.0,
            degeneracy_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPoint {
    pub mu: f64,
    pub jz: f64,
    pub jx2: f64,
    pub var_jx: f64,
    /// `4 Var(J_y)` of the ground state, its QFI for generator `J_y`.
    pub fq: f64,
    pub archetype_bound: f64,
    pub rel_diff: f64,
    pub degenerate: bool,
}

/// Moments and QFI of the ground states of `+-J_x^2 - mu J_z` (symmetric representation).
pub fn boundary_scan(
    n: usize,
    sign: BoundarySign,
    mu_values: &[f64],
    options: &BoundaryOptions,
) -> Result<Vec<BoundaryPoint>> {
    let rep = Representation::symmetric(n)?;
    let spins = build_collective::<f64>(rep);
    let x2 = match sign {
        BoundarySign::Plus => spins.jx2.clone(),
        BoundarySign::Minus => spins.jx2.scaled(-1.0),
    };
    let mut points = Vec::with_capacity(mu_values.len());
    for &mu in mu_values {
        if !mu.is_finite() {
            return Err(QfiError::InvalidInput(format!("mu {mu} is not finite")));
        }
        if sign == BoundarySign::Plus {
            if mu <= 0.0 {
                return Err(QfiError::Domain(format!(
                    "plus branch needs mu > 0 for nondegenerate ground states, got {mu}"
                )));
            }
            if n % 2 == 1 && mu < options.odd_mu_floor {
                return Err(QfiError::Domain(format!(
                    "odd N = {n} on the plus branch is only extremal for mu >= {}, got {mu}",
                    options.odd_mu_floor
                )));
            }
        }
        let h = x2.add_scaled(&spins.jz, -mu)?;
        // ground state of h = top eigenvector of -h
        let (_, psi, gap) = lambda_max_with_gap(&h.scaled(-1.0))?;
        let scale = h.max_abs_entry().max(1.0);
        let jz = expectation(&spins.jz, &psi)?;
        let jx2 = expectation(&spins.jx2, &psi)?;
        let jx = expectation(&spins.jx, &psi)?;
        let var_jx = jx2 - jx * jx;
        let fq = 4.0 * variance(&spins.jy, &psi)?;
        let archetype = archetype_bound(jz, var_jx).unwrap_or(f64::NAN);
        let rel_diff = if fq > 0.0 { (fq - archetype) / fq } else { f64::NAN };
        points.push(BoundaryPoint {
            mu,
            jz,
            jx2,
            var_jx,
            fq,
            archetype_bound: archetype,
            rel_diff,
            degenerate: gap < options.degeneracy_tol * scale,
        });
    }
    Ok(points)
}

/// Log-spaced mu values `lo * (hi/lo)^(i/(count-1))`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct JxReductionSample {
    pub jz: f64,
    pub jx2: f64,
    pub without_jx: f64,
    pub with_jx: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JxReductionReport {
    pub n: usize,
    pub samples: Vec<JxReductionSample>,
    pub max_rel_diff: f64,
}

impl JxReductionReport {
    pub fn agrees_within(&self, rel: f64) -> bool {
        self.max_rel_diff <= rel
    }
}

/// Compares `{<J_z>, <J_x^2>}` bounds with and without an explicit `<J_x> = 0`
/// constraint on moments of random full-representation states.
pub fn check_jx_reduction(
    n: usize,
    samples: usize,
    seed: u64,
    settings: &OptimizerSettings,
) -> Result<JxReductionReport> {
    let rep = Representation::full(n)?;
    let spins = build_collective::<f64>(rep);
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let rho = random_density_matrix::<f64, _>(rep.dim(), 1 + i % rep.dim(), &mut rng);
        let jz = expectation(&spins.jz, &rho)?;
        let jx2 = expectation(&spins.jx2, &rho)?;
        let base = vec![
            Constraint::new(spins.jz.clone(), jz, "jz"),
            Constraint::new(spins.jx2.clone(), jx2, "jx2"),
        ];
        let mut extended = base.clone();
        extended.push(Constraint::new(spins.jx.clone(), 0.0, "jx"));
        let run = |cs: Vec<Constraint<f64>>| {
            lower_bound_multi(
                &BoundProblem::new(spins.jy.clone(), cs, n, RepresentationKind::Full)
                    .with_settings(settings.clone()),
            )
        };
        let without_jx = run(base)?.bound;
        let with_jx = run(extended)?.bound;
        let denom = without_jx.abs().max(with_jx.abs());
        let rel_diff = if denom > 1e-9 { (with_jx - without_jx).abs() / denom } else { 0.0 };
        out.push(JxReductionSample {
            jz,
            jx2,
            without_jx,
            with_jx,
            rel_diff,
        });
    }
    let max_rel_diff = out.iter().map(|s| s.rel_diff).fold(0.0, f64::max);
    Ok(JxReductionReport {
        n,
        samples: out,
        max_rel_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_full;
    use crate::spin::polarized_y_state;

    #[test]
    fn ghz_examples() {
        assert_eq!(ghz_bound(0.5, 7).unwrap(), 0.0);
        assert!((ghz_bound(0.776, 8).unwrap() / 64.0 - 0.3047).abs() < 5e-5);
        assert!((ghz_bound(1.0, 10).unwrap() - 100.0).abs() < 1e-12);
        assert!(ghz_bound(1.1, 3).is_err());
        let n = 5;
        let nn = 25.0;
        assert_eq!(ghz_legendre_closed(-1.0, n), 0.0);
        assert!((ghz_legendre_closed(4.0 * nn, n) - 3.0 * nn).abs() < 1e-12);
        assert!((ghz_legendre_closed(2.0 * nn, n) - 1.25 * nn).abs() < 1e-12);
    }

    #[test]
    fn thresholds() {
        assert!((dicke_threshold(6).unwrap() - 0.3125).abs() < 1e-12);
        assert!((dicke_threshold(40).unwrap() - 0.1254).abs() < 5e-5);
        assert!((dicke_threshold(2).unwrap() - 0.5).abs() < 1e-12);
        assert!(dicke_threshold(5).is_err());
        for n in [100, 400, 2000] {
            let asym = (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
            assert!((dicke_threshold(n).unwrap() / asym - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn y_overlaps_match_rotated_dicke_states() {
        for n in [2usize, 4, 6, 8] {
            let rep = Representation::symmetric(n).unwrap();
            let spins = build_collective::<f64>(rep);
            let (vals, vecs) = eig_full(&spins.jy).unwrap();
            let d = dicke_state::<f64>(rep, n / 2).unwrap();
            for m in 0..=n {
                // J_y eigenvalue N/2 - m, listed ascending
                let idx = vals.iter().position(|v| (v - (n as f64 / 2.0 - m as f64)).abs() < 1e-9).unwrap();
                let got = d.fidelity(&vecs[idx]);
                assert!((got - dicke_y_overlap(n, m).unwrap()).abs() < 1e-10, "N={n} m={m}");
            }
            let y = polarized_y_state::<f64>(rep);
            assert!((d.fidelity(&y) - dicke_threshold(n).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn archetype_examples() {
        assert!((archetype_bound(977.5, 62.9).unwrap() / 2300.0 - 6.605).abs() < 1e-3);
        assert_eq!(archetype_bound(0.0, 1.0).unwrap(), 0.0);
        assert!((archetype_bound(5.0, 2.5).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(archetype_bound(1.0, 0.0), Err(QfiError::Domain(_))));
    }

    #[test]
    fn boundary_limits() {
        let pts = boundary_scan(4, BoundarySign::Plus, &[1e-4, 1e4], &BoundaryOptions::default()).unwrap();
        let (d, p) = (&pts[0], &pts[1]);
        assert!(d.jz.abs() < 1e-3 && d.jx2 < 1e-6);
        assert!((d.fq - 12.0).abs() < 1e-6);
        assert!((p.jz - 2.0).abs() < 1e-3 && (p.jx2 - 1.0).abs() < 1e-3);
        assert!(boundary_scan(5, BoundarySign::Plus, &[0.1], &BoundaryOptions::default()).is_err());
        assert!(boundary_scan(4, BoundarySign::Plus, &[0.0], &BoundaryOptions::default()).is_err());
    }
}
