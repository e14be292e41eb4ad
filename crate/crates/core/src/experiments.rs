//! Experiment records, fidelity-based bounds with uncertainty propagation,
//! entanglement depth, and the large-N scaling procedures for cold-gas
//! squeezing and Dicke experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{archetype_bound, dicke_fidelity_bound, ghz_bound, ghz_bound_derivative};
use crate::bound::{lower_bound_multi, BoundProblem, BoundResult, Constraint, OptimizerSettings};
use crate::error::{QfiError, Result};
use crate::spin::{build_collective, casimir, Representation, RepresentationKind};

/// Results of scaling procedures are estimates, not certified bounds.
pub const EXTRAPOLATED_LABEL: &str = "extrapolated estimate";

/// Relative spread of the last three samples tolerated as a plateau.
pub const PLATEAU_SPREAD: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "GHZ")]
    Ghz,
    Dicke,
    SqueezedMoments,
    DickeMoments,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Ghz => "GHZ",
            Family::Dicke => "Dicke",
            Family::SqueezedMoments => "SqueezedMoments",
            Family::DickeMoments => "DickeMoments",
        })
    }
}

/// A measured value with an optional one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Moments {
    pub jz: Option<Measured>,
    pub jx2: Option<Measured>,
    pub jy2: Option<Measured>,
    pub jz2: Option<Measured>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub source: String,
    pub n_qubits: usize,
    pub family: Family,
    pub fidelity: Option<Measured>,
    pub moments: Option<Moments>,
}

/// On-disk shape of one record line.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    name: String,
    #[serde(default)]
    source: String,
    n: usize,
    family: Family,
    fidelity: Option<f64>,
    fidelity_sigma: Option<f64>,
    jz: Option<f64>,
    jz_sigma: Option<f64>,
    jx2: Option<f64>,
    jx2_sigma: Option<f64>,
    jy2: Option<f64>,
    jy2_sigma: Option<f64>,
    jz2: Option<f64>,
    jz2_sigma: Option<f64>,
}

fn measured(value: Option<f64>, sigma: Option<f64>) -> Option<Measured> {
    value.map(|value| Measured { value, sigma })
}

impl ExperimentRecord {
    fn from_raw(raw: RawRecord) -> Result<Self> {
        let bad = |message: String| QfiError::Record {
            name: raw.name.clone(),
            message,
        };
        if raw.n == 0 {
            return Err(bad("n must be positive".into()));
        }
        let fidelity = measured(raw.fidelity, raw.fidelity_sigma);
        let moments = Moments {
            jz: measured(raw.jz, raw.jz_sigma),
            jx2: measured(raw.jx2, raw.jx2_sigma),
            jy2: measured(raw.jy2, raw.jy2_sigma),
            jz2: measured(raw.jz2, raw.jz2_sigma),
        };
        let has_moments = moments != Moments::default();
        let fidelity_family = matches!(raw.family, Family::Ghz | Family::Dicke);
        if fidelity_family && (fidelity.is_none() || has_moments) {
            return Err(bad(format!("family {} needs a fidelity and no moments", raw.family)));
        }
        if !fidelity_family && (fidelity.is_some() || !has_moments) {
            return Err(bad(format!("family {} needs moments and no fidelity", raw.family)));
        }
        if let Some(f) = fidelity {
            if !(0.0..=1.0).contains(&f.value) {
                return Err(bad(format!("fidelity {} is outside [0, 1]", f.value)));
            }
        }
        let sigmas = [fidelity, moments.jz, moments.jx2, moments.jy2, moments.jz2];
        if sigmas.iter().flatten().any(|m| !m.value.is_finite() || m.sigma.is_some_and(|s| !(s >= 0.0))) {
            return Err(bad("values must be finite and sigmas non-negative".into()));
        }
        Ok(Self {
            name: raw.name,
            source: raw.source,
            n_qubits: raw.n,
            family: raw.family,
            fidelity,
            moments: has_moments.then_some(moments),
        })
    }

    fn mismatch(&self, wanted: &str) -> QfiError {
        QfiError::Record {
            name: self.name.clone(),
            message: format!("family {} cannot be used as {wanted}", self.family),
        }
    }

    fn moment(&self, pick: fn(&Moments) -> Option<Measured>, what: &str) -> Result<Measured> {
        self.moments
            .as_ref()
            .and_then(pick)
            .ok_or_else(|| QfiError::Record {
                name: self.name.clone(),
                message: format!("missing moment {what}"),
            })
    }
}

/// Parses one record per line; blank lines and lines starting with `#` are skipped.
pub fn parse_records(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| QfiError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(ExperimentRecord::from_raw(raw)?);
    }
    Ok(out)
}

/// Second-order propagation of a Gaussian input uncertainty through `f`:
/// `sqrt(f'^2 s^2 + f''^2 s^4 / 2)`, exact when `f` is quadratic.
pub fn propagate_second_order(d1: f64, d2: f64, sigma: f64) -> f64 {
    (d1 * d1 * sigma * sigma + 0.5 * d2 * d2 * sigma.powi(4)).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityBound {
    pub bound: f64,
    pub sigma: Option<f64>,
    pub bound_per_n2: f64,
    pub sigma_per_n2: Option<f64>,
    pub representation: String,
    pub certified: bool,
}

/// Bound from a GHZ or Dicke fidelity record. GHZ uses the closed form and
/// its derivatives; Dicke runs the engine and takes central differences
/// with step `sigma / 10`.
pub fn bound_from_fidelity(rec: &ExperimentRecord, settings: &OptimizerSettings) -> Result<FidelityBound> {
    let f = rec.fidelity.ok_or_else(|| rec.mismatch("a fidelity record"))?;
    let n = rec.n_qubits;
    let nn = (n * n) as f64;
    let (bound, sigma, representation, certified) = match rec.family {
        Family::Ghz => {
            let b = ghz_bound(f.value, n)?;
            let sigma = f.sigma.map(|s| {
                let d2 = if f.value > 0.5 { 8.0 * nn } else { 0.0 };
                propagate_second_order(ghz_bound_derivative(f.value, n), d2, s)
            });
            (b, sigma, "analytic".to_string(), true)
        }
        Family::Dicke => {
            let run = |x: f64| dicke_fidelity_bound(n, x, settings);
            let center = run(f.value)?;
            let sigma = match f.sigma {
                Some(s) if s > 0.0 => {
                    let h = (s / 10.0).min(0.5);
                    let c = f.value.clamp(h, 1.0 - h);
                    let mid = if c == f.value { center.bound } else { run(c)?.bound };
                    let (up, down) = (run(c + h)?.bound, run(c - h)?.bound);
                    let d1 = (up - down) / (2.0 * h);
                    let d2 = (up - 2.0 * mid + down) / (h * h);
                    Some(propagate_second_order(d1, d2, s))
                }
                Some(_) => Some(0.0),
                None => None,
            };
            let certified = center.general_state_valid;
            (center.bound, sigma, center.representation.to_string(), certified)
        }
        _ => return Err(rec.mismatch("a fidelity record")),
    };
    Ok(FidelityBound {
        bound,
        sigma,
        bound_per_n2: bound / nn,
        sigma_per_n2: sigma.map(|s| s / nn),
        representation,
        certified,
    })
}

/// Largest `k` with `bound > (k - 1) N`: the bound certifies at least
/// `k`-particle entanglement. Returns 1 when nothing is certified.
pub fn entanglement_depth(bound: f64, n: usize) -> usize {
    if n == 0 || !(bound > 0.0) {
        return 1;
    }
    let k = (bound / n as f64).ceil();
    (k as usize).clamp(1, n)
}

/// `<J_z> = N' alpha / 2` and `Var(J_x) = xi2 N' alpha^2 / 4`, which keep the
/// squeezing parameter fixed as the particle number changes.
pub fn scale_squeezing(alpha: f64, xi2: f64, n_prime: usize) -> (f64, f64) {
    let np = n_prime as f64;
    (np * alpha / 2.0, xi2 * np * alpha * alpha / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// Sequential, each run starting from multipliers predicted by the previous ones.
    WarmChain,
    /// Independent cold starts evaluated in parallel.
    ColdParallel,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRun {
    pub n_target: usize,
    pub n_primes: Vec<usize>,
    /// Engine bound for each `N'`.
    pub bounds: Vec<f64>,
    /// Per-particle value for each `N'` (scaled to `N` for the Dicke family).
    pub bounds_per_n: Vec<f64>,
    /// `<J_z>^2 / Var(J_x) / N'` per point; empty for the Dicke family.
    pub archetype_per_n: Vec<f64>,
    /// Mean of the last three per-particle values.
    pub extrapolated: f64,
    /// Relative spread of the last three per-particle values.
    pub spread: f64,
    pub plateau: bool,
    pub gamma: Option<f64>,
    pub iterations: Vec<usize>,
    /// Warm-chain pilot run as (`N'`, iterations).
    pub pilot: Option<(usize, usize)>,
    pub r_opts: Vec<Vec<f64>>,
    pub label: &'static str,
}

fn check_n_primes(n_primes: &[usize]) -> Result<()> {
    if n_primes.is_empty() {
        return Err(QfiError::InvalidInput("at least one N' is required".into()));
    }
    if n_primes.windows(2).any(|w| w[1] <= w[0]) || n_primes[0] == 0 {
        return Err(QfiError::InvalidInput("N' values must be positive and strictly ascending".into()));
    }
    Ok(())
}

/// Predicts the next multipliers from the last two runs: a power law in `N'`
/// per component when both values share a sign, else linear; with one run,
/// a copy of it.
fn predict_r(history: &[(usize, Vec<f64>)], n: usize) -> Vec<f64> {
    match history {
        [.., (n1, r1), (n2, r2)] => {
            let (n, n1, n2) = (n as f64, *n1 as f64, *n2 as f64);
            r2.iter()
                .zip(r1)
                .map(|(&b, &a)| {
                    if a * b > 0.0 {
                        let p = (b / a).ln() / (n2 / n1).ln();
                        b * (n / n2).powf(p.clamp(-4.0, 4.0))
                    } else {
                        b + (b - a) * (n - n2) / (n2 - n1)
                    }
                })
                .collect()
        }
        [.., (_, r)] => r.clone(),
        [] => Vec::new(),
    }
}

/// Chain results plus the pilot run (`N'`, iterations) when one was made.
struct Chain {
    results: Vec<BoundResult<f64>>,
    pilot: Option<(usize, usize)>,
}

/// In warm mode the first `N'` starts cold and every later run starts from
/// multipliers predicted by the previous ones. A cold pilot run at half the
/// first `N'` extends the history so each warm start gets a two-point
/// prediction.
fn run_chain<F>(n_primes: &[usize], mode: ScanMode, settings: &OptimizerSettings, run: F) -> Result<Chain>
where
    F: Fn(usize, &OptimizerSettings) -> Result<BoundResult<f64>> + Sync,
{
    match mode {
        ScanMode::ColdParallel => Ok(Chain {
            results: n_primes.par_iter().map(|&n| run(n, settings)).collect::<Result<_>>()?,
            pilot: None,
        }),
        ScanMode::WarmChain => {
            let mut history: Vec<(usize, Vec<f64>)> = Vec::new();
            let mut pilot = None;
            let n_pilot = n_primes[0] / 2;
            if n_primes.len() > 1 && n_pilot >= 4 && settings.r_init.is_empty() {
                let res = run(n_pilot, settings)?;
                pilot = Some((n_pilot, res.iterations));
                history.push((n_pilot, res.r_opt));
            }
            let mut results = Vec::with_capacity(n_primes.len());
            for &n in n_primes {
                let mut s = settings.clone();
                if !results.is_empty() {
                    s.r_init = predict_r(&history, n);
                }
                let res = run(n, &s)?;
                history.push((n, res.r_opt.clone()));
                results.push(res);
            }
            Ok(Chain { results, pilot })
        }
    }
}

fn plateau_stats(values: &[f64]) -> (f64, f64) {
    let tail = &values[values.len().saturating_sub(3)..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let spread = if mean != 0.0 { (hi - lo) / mean.abs() } else { 0.0 };
    (mean, spread)
}

/// Symmetric-representation bound from `{<J_z>, <J_x^2>, <J_x> = 0}` at `N'`.
pub fn squeezing_bound(n_prime: usize, jz: f64, var_jx: f64, settings: &OptimizerSettings) -> Result<BoundResult<f64>> {
    let rep = Representation::symmetric(n_prime)?;
    let s = build_collective::<f64>(rep);
    let problem = BoundProblem::new(
        s.jy.clone(),
        vec![
            Constraint::new(s.jz.clone(), jz, "jz"),
            Constraint::new(s.jx2.clone(), var_jx, "jx2"),
            Constraint::new(s.jx.clone(), 0.0, "jx"),
        ],
        n_prime,
        RepresentationKind::Symmetric,
    )
    .with_settings(settings.clone());
    lower_bound_multi(&problem)
}

/// Squeezing bounds per particle for the scaled moments at each `N'`.
pub fn squeezing_convergence(
    alpha: f64,
    xi2: f64,
    n_target: usize,
    n_primes: &[usize],
    settings: &OptimizerSettings,
    mode: ScanMode,
) -> Result<ScalingRun> {
    check_n_primes(n_primes)?;
    if !(alpha > 0.0 && alpha <= 1.0 && xi2 > 0.0) {
        return Err(QfiError::Domain(format!("need 0 < alpha <= 1 and xi2 > 0, got {alpha}, {xi2}")));
    }
    let Chain { results, pilot } = run_chain(n_primes, mode, settings, |n, s| {
        let (jz, var) = scale_squeezing(alpha, xi2, n);
        squeezing_bound(n, jz, var, s)
    })?;
    let bounds: Vec<f64> = results.iter().map(|r| r.bound).collect();
    let bounds_per_n: Vec<f64> = bounds.iter().zip(n_primes).map(|(b, &n)| b / n as f64).collect();
    let archetype_per_n = n_primes
        .iter()
        .map(|&n| {
            let (jz, var) = scale_squeezing(alpha, xi2, n);
            archetype_bound(jz, var).map(|a| a / n as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let (extrapolated, spread) = plateau_stats(&bounds_per_n);
    Ok(ScalingRun {
        n_target,
        n_primes: n_primes.to_vec(),
        bounds,
        bounds_per_n,
        archetype_per_n,
        extrapolated,
        spread,
        plateau: spread <= PLATEAU_SPREAD,
        gamma: None,
        iterations: results.iter().map(|r| r.iterations).collect(),
        pilot,
        r_opts: results.into_iter().map(|r| r.r_opt).collect(),
        label: EXTRAPOLATED_LABEL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetrizedMoments {
    pub gamma: f64,
    pub jx2: f64,
    pub jy2: f64,
    pub jz2: f64,
}

/// Rescales second moments by `gamma = J_N / sum_l <J_l^2>` so they sum to
/// the symmetric-subspace Casimir value `J_N = (N/2)(N/2 + 1)`.
pub fn symmetrize_moments(jx2: f64, jy2: f64, jz2: f64, n: usize) -> Result<SymmetrizedMoments> {
    let total = jx2 + jy2 + jz2;
    if !(total > 0.0) || [jx2, jy2, jz2].iter().any(|v| !(*v >= 0.0)) {
        return Err(QfiError::Domain(format!(
            "second moments must be non-negative with a positive sum, got ({jx2}, {jy2}, {jz2})"
        )));
    }
    let j = casimir(n);
    let gamma = j / total;
    let (jx2s, jz2s) = (gamma * jx2, gamma * jz2);
    Ok(SymmetrizedMoments {
        gamma,
        jx2: jx2s,
        // closes the sum exactly
        jy2: j - jx2s - jz2s,
        jz2: jz2s,
    })
}

/// Symmetric-representation bound from `{<J_x^2>, <J_y^2>, <J_z^2>}` at `N'`,
/// with `<J_z^2>` fixed and the other two filling the Casimir value.
pub fn dicke_moment_bound(n_prime: usize, sym_jz2: f64, settings: &OptimizerSettings) -> Result<BoundResult<f64>> {
    let rep = Representation::symmetric(n_prime)?;
    let s = build_collective::<f64>(rep);
    let perp = 0.5 * (casimir(n_prime) - sym_jz2);
    let problem = BoundProblem::new(
        s.jy.clone(),
        vec![
            Constraint::new(s.jx2.clone(), perp, "jx2"),
            Constraint::new(s.jy2.clone(), perp, "jy2"),
            Constraint::new(s.jz2.clone(), sym_jz2, "jz2"),
        ],
        n_prime,
        RepresentationKind::Symmetric,
    )
    .with_settings(settings.clone());
    lower_bound_multi(&problem)
}

/// Per-particle estimate `(1/gamma) (J_N / J_N') B_sym(N') / N` for each `N'`.
pub fn dicke_extrapolation(
    sym_jz2: f64,
    n: usize,
    gamma: f64,
    n_primes: &[usize],
    settings: &OptimizerSettings,
    mode: ScanMode,
) -> Result<ScalingRun> {
    check_n_primes(n_primes)?;
    if !(gamma > 0.0) || !(sym_jz2 >= 0.0) {
        return Err(QfiError::Domain(format!("need gamma > 0 and <J_z^2> >= 0, got {gamma}, {sym_jz2}")));
    }
    let Chain { results, pilot } = run_chain(n_primes, mode, settings, |np, s| dicke_moment_bound(np, sym_jz2, s))?;
    let j_n = casimir(n);
    let bounds: Vec<f64> = results.iter().map(|r| r.bound).collect();
    let bounds_per_n: Vec<f64> = bounds
        .iter()
        .zip(n_primes)
        .map(|(b, &np)| b * j_n / casimir(np) / gamma / n as f64)
        .collect();
    let (extrapolated, spread) = plateau_stats(&bounds_per_n);
    Ok(ScalingRun {
        n_target: n,
        n_primes: n_primes.to_vec(),
        bounds,
        bounds_per_n,
        archetype_per_n: Vec::new(),
        extrapolated,
        spread,
        plateau: spread <= PLATEAU_SPREAD,
        gamma: Some(gamma),
        iterations: results.iter().map(|r| r.iterations).collect(),
        pilot,
        r_opts: results.into_iter().map(|r| r.r_opt).collect(),
        label: EXTRAPOLATED_LABEL,
    })
}

/// One output row per record.
#[derive(Debug, Clone, Serialize)]
pub struct RecordResult {
    pub name: String,
    pub n: usize,
    pub family: Family,
    pub bound: f64,
    pub bound_sigma: Option<f64>,
    pub bound_per_n: f64,
    pub bound_per_n2: f64,
    pub depth_k: usize,
    pub representation: String,
    pub certified_flag: bool,
}

#[derive(Debug, Clone)]
pub struct EvaluationOptions {
    pub settings: OptimizerSettings,
    pub squeezing_n_primes: Vec<usize>,
    pub dicke_n_primes: Vec<usize>,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self {
            settings: OptimizerSettings::default(),
            squeezing_n_primes: vec![200, 300, 400],
            dicke_n_primes: vec![400, 600, 800, 1000],
        }
    }
}

/// Evaluates a record with the pipeline matching its family. Moment families
/// go through the scaling procedures and are never flagged as certified.
pub fn evaluate_record(rec: &ExperimentRecord, options: &EvaluationOptions) -> Result<RecordResult> {
    let n = rec.n_qubits;
    let nf = n as f64;
    let (bound, sigma, representation, certified) = match rec.family {
        Family::Ghz | Family::Dicke => {
            let fb = bound_from_fidelity(rec, &options.settings)?;
            (fb.bound, fb.sigma, fb.representation, fb.certified)
        }
        Family::SqueezedMoments => {
            let jz = rec.moment(|m| m.jz, "jz")?.value;
            let var = rec.moment(|m| m.jx2, "jx2")?.value;
            if !(jz > 0.0 && var > 0.0) {
                return Err(QfiError::Record {
                    name: rec.name.clone(),
                    message: "squeezing needs positive <J_z> and <J_x^2>".into(),
                });
            }
            let alpha = 2.0 * jz / nf;
            let xi2 = var * nf / (jz * jz);
            let run = squeezing_convergence(
                alpha,
                xi2,
                n,
                &options.squeezing_n_primes,
                &options.settings,
                ScanMode::WarmChain,
            )?;
            (run.extrapolated * nf, None, "symmetric".to_string(), false)
        }
        Family::DickeMoments => {
            let sym = symmetrize_moments(
                rec.moment(|m| m.jx2, "jx2")?.value,
                rec.moment(|m| m.jy2, "jy2")?.value,
                rec.moment(|m| m.jz2, "jz2")?.value,
                n,
            )?;
            let run = dicke_extrapolation(
                sym.jz2,
                n,
                sym.gamma,
                &options.dicke_n_primes,
                &options.settings,
                ScanMode::WarmChain,
            )?;
            (run.extrapolated * nf, None, "symmetric".to_string(), false)
        }
    };
    Ok(RecordResult {
        name: rec.name.clone(),
        n,
        family: rec.family,
        bound,
        bound_sigma: sigma,
        bound_per_n: bound / nf,
        bound_per_n2: bound / (nf * nf),
        depth_k: entanglement_depth(bound, n),
        representation,
        certified_flag: certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GHZ8: &str = r#"{"name": "g", "n": 8, "family": "GHZ", "fidelity": 0.776, "fidelity_sigma": 0.006}"#;

    #[test]
    fn parses_and_validates_records() {
        let recs = parse_records(&format!("# comment\n\n{GHZ8}\n")).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].family, Family::Ghz);
        assert_eq!(recs[0].fidelity.unwrap().sigma, Some(0.006));
        let bad = [
            r#"{"name": "x", "n": 4, "family": "GHZ"}"#,
            r#"{"name": "x", "n": 4, "family": "GHZ", "fidelity": 1.2}"#,
            r#"{"name": "x", "n": 4, "family": "Dicke", "fidelity": 0.5, "jz": 1}"#,
            r#"{"name": "x", "n": 4, "family": "DickeMoments", "fidelity": 0.5}"#,
            r#"{"name": "x", "n": 4, "family": "GHZ", "fidelity": 0.5, "colour": 1}"#,
        ];
        for b in bad {
            assert!(parse_records(b).is_err(), "{b}");
        }
        match parse_records("\n{oops") {
            Err(QfiError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ghz_record_propagation() {
        let rec = &parse_records(GHZ8).unwrap()[0];
        let fb = bound_from_fidelity(rec, &OptimizerSettings::default()).unwrap();
        assert!((fb.bound_per_n2 - 0.3047).abs() < 5e-5);
        assert!((fb.sigma_per_n2.unwrap() - 0.0134).abs() < 0.0134 * 0.15);
    }

    #[test]
    fn second_order_is_exact_for_quadratics() {
        // f(x) = x^2 with x ~ N(m, s^2): Var f = 4 m^2 s^2 + 2 s^4
        let (m, s) = (0.3_f64, 0.05_f64);
        let want = (4.0 * m * m * s * s + 2.0 * s.powi(4)).sqrt();
        assert!((propagate_second_order(2.0 * m, 2.0, s) - want).abs() < 1e-15);
    }

    #[test]
    fn depth_examples() {
        assert_eq!(entanglement_depth(64.0, 8), 8);
        assert_eq!(entanglement_depth(0.0, 8), 1);
        assert_eq!(entanglement_depth(0.402 * 64.0, 8), 4);
        assert_eq!(entanglement_depth(8.0, 8), 1);
        assert_eq!(entanglement_depth(8.0 + 1e-9, 8), 2);
    }

    #[test]
    fn squeezing_scaling_examples() {
        let (jz, var) = scale_squeezing(0.85, 0.1514, 2300);
        assert!((jz - 977.5).abs() < 1e-9);
        assert!((var - 62.9).abs() < 0.05);
        for n in [10, 100, 2300] {
            let (jz, var) = scale_squeezing(0.85, 0.1514, n);
            assert!((archetype_bound(jz, var).unwrap() / n as f64 - 1.0 / 0.1514).abs() < 1e-9);
        }
        assert_eq!(scale_squeezing(1.0, 1.0, 4), (2.0, 1.0));
    }

    #[test]
    fn symmetrize_examples() {
        let s = symmetrize_moments(6e6, 6e6, 112.0, 7900).unwrap();
        assert!((s.gamma - 1.301).abs() < 1e-3);
        assert!((s.jz2 - 145.66).abs() < 0.01);
        assert!((s.jx2 - 7.8e6).abs() < 0.01e6);
        assert!((s.jx2 + s.jy2 + s.jz2 - casimir(7900)).abs() <= 1e-12 * casimir(7900));
        let j = casimir(10);
        let t = symmetrize_moments(j / 2.0, j / 4.0, j / 4.0, 10).unwrap();
        assert!((t.gamma - 1.0).abs() < 1e-15);
        assert!(matches!(symmetrize_moments(0.0, 0.0, 0.0, 4), Err(QfiError::Domain(_))));
    }

    #[test]
    fn predicted_multipliers() {
        assert!(predict_r(&[], 5).is_empty());
        assert_eq!(predict_r(&[(10, vec![1.0, 2.0])], 20), vec![1.0, 2.0]);
        let r = predict_r(&[(10, vec![1.0, 2.0, -1.0]), (20, vec![1.0, 8.0, 1.0])], 40);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 32.0).abs() < 1e-9 && (r[2] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_dicke_moments() {
        for n in [4usize, 6, 8] {
            let b = dicke_moment_bound(n, 0.0, &OptimizerSettings::default()).unwrap();
            let want = (n * (n + 2)) as f64 / 2.0;
            assert!((b.bound - want).abs() < 1e-6 * want, "N={n}: {}", b.bound);
        }
    }
}
