//! One function per subcommand, each producing a result table.

use clap::{Args, ValueEnum};
use rayon::prelude::*;

use qfi_core::analytic::{
    archetype_bound, boundary_scan, dicke_fidelity_bound, dicke_threshold, ghz_bound, ghz_fidelity_bound, log_spaced,
    BoundaryOptions, BoundarySign,
};
use qfi_core::bound::{lower_bound_multi, BoundProblem, Constraint, OptimizerSettings};
use qfi_core::experiments::{
    dicke_extrapolation, evaluate_record, parse_records, squeezing_convergence, symmetrize_moments, EvaluationOptions,
    ScalingRun, ScanMode, EXTRAPOLATED_LABEL,
};
use qfi_core::spin::{build_collective, Representation, RepresentationKind, FULL_REP_CAP};
use qfi_core::validation::soundness_suite;
use qfi_core::{QfiError, Result};

use crate::output::{Cell, Table};
use crate::Rep;

pub struct Context {
    pub settings: OptimizerSettings,
    pub seed: u64,
}

/// Table plus a flag set when a validation check failed.
pub type Outcome = Result<(Table, bool)>;

/// Parses `lo:hi:count` into `count` evenly spaced values, endpoints included.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let bad = || QfiError::InvalidInput(format!("expected lo:hi:count, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..count)
        .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
        .collect())
}

fn fidelities(fidelity: Option<f64>, sweep: Option<&str>) -> Result<Vec<f64>> {
    match (fidelity, sweep) {
        (Some(f), None) => Ok(vec![f]),
        (None, Some(s)) => parse_range(s),
        _ => Err(QfiError::InvalidInput("give exactly one of --fidelity and --sweep".into())),
    }
}

#[derive(Debug, Args)]
pub struct GhzArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    fidelity: Option<f64>,
    /// lo:hi:count
    #[arg(long)]
    sweep: Option<String>,
    /// Also run the numerical engine next to the closed form.
    #[arg(long)]
    numeric: bool,
    #[arg(long, value_enum, default_value = "symmetric")]
    representation: Rep,
}

pub fn ghz(ctx: &Context, a: &GhzArgs) -> Outcome {
    let fs = fidelities(a.fidelity, a.sweep.as_deref())?;
    let nn = (a.n * a.n) as f64;
    let mut columns = vec!["fidelity", "bound_per_n2", "bound"];
    if a.numeric {
        Representation::new(a.representation.into(), a.n)?;
        columns.extend(["numeric_bound_per_n2", "numeric_bound", "certified"]);
    }
    let rows: Vec<Vec<Cell>> = fs
        .par_iter()
        .map(|&f| {
            let b = ghz_bound(f, a.n)?;
            let mut row = vec![f.into(), (b / nn).into(), b.into()];
            if a.numeric {
                let r = ghz_fidelity_bound(a.n, f, a.representation.into(), &ctx.settings)?;
                row.extend([(r.bound / nn).into(), r.bound.into(), r.general_state_valid.into()]);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&columns);
    rows.into_iter().for_each(|r| t.push(r));
    Ok((t, false))
}

#[derive(Debug, Args)]
pub struct DickeArgs {
    /// Even number of qubits.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    fidelity: Option<f64>,
    /// lo:hi:count
    #[arg(long)]
    sweep: Option<String>,
}

pub fn dicke_fidelity(ctx: &Context, a: &DickeArgs) -> Outcome {
    let fs = fidelities(a.fidelity, a.sweep.as_deref())?;
    let threshold = dicke_threshold(a.n)?;
    let nn = (a.n * a.n) as f64;
    let rows: Vec<Vec<Cell>> = fs
        .par_iter()
        .map(|&f| {
            let r = dicke_fidelity_bound(a.n, f, &ctx.settings)?;
            Ok(vec![
                f.into(),
                (r.bound / nn).into(),
                r.bound.into(),
                threshold.into(),
                (f > threshold).into(),
                r.general_state_valid.into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["fidelity", "bound_per_n2", "bound", "threshold", "above_threshold", "certified"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok((t, false))
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long)]
    n: usize,
    /// <J_z> values as lo:hi:count
    #[arg(long)]
    jz_grid: String,
    /// <J_x^2> values as lo:hi:count
    #[arg(long)]
    jx2_grid: String,
    /// Defaults to full up to the full-representation cap, symmetric above.
    #[arg(long, value_enum)]
    representation: Option<Rep>,
}

pub fn squeezing_map(ctx: &Context, a: &MapArgs) -> Outcome {
    let kind = a.representation.map(RepresentationKind::from).unwrap_or(if a.n <= FULL_REP_CAP {
        RepresentationKind::Full
    } else {
        RepresentationKind::Symmetric
    });
    let rep = Representation::new(kind, a.n)?;
    let spins = build_collective::<f64>(rep);
    let (jzs, jx2s) = (parse_range(&a.jz_grid)?, parse_range(&a.jx2_grid)?);
    let cells: Vec<(f64, f64)> = jzs.iter().flat_map(|&z| jx2s.iter().map(move |&x| (z, x))).collect();
    let nf = a.n as f64;
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .map(|&(jz, jx2)| {
            let problem = BoundProblem::new(
                spins.jy.clone(),
                vec![
                    Constraint::new(spins.jz.clone(), jz, "jz"),
                    Constraint::new(spins.jx2.clone(), jx2, "jx2"),
                ],
                a.n,
                kind,
            )
            .with_settings(ctx.settings.clone());
            let archetype = archetype_bound(jz, jx2).map(|b| b / nf).ok();
            match lower_bound_multi(&problem) {
                Ok(r) => Ok(vec![
                    jz.into(),
                    jx2.into(),
                    true.into(),
                    r.bound.into(),
                    (r.bound / nf).into(),
                    archetype.into(),
                ]),
                Err(QfiError::Infeasible(_)) => Ok(vec![
                    jz.into(),
                    jx2.into(),
                    false.into(),
                    Cell::Missing,
                    Cell::Missing,
                    archetype.into(),
                ]),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["jz", "jx2", "feasible", "bound", "bound_per_n", "archetype_per_n"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok((t, false))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "plus")]
    sign: Sign,
    /// Explicit mu values.
    #[arg(long, value_delimiter = ',')]
    mu_list: Vec<f64>,
    /// Log-spaced mu values as lo:hi:count, used when no list is given.
    #[arg(long, default_value = "0.001:1000:61")]
    mu_log: String,
    /// Smallest mu accepted for odd N on the plus branch.
    #[arg(long, default_value_t = 1.0)]
    odd_mu_floor: f64,
}

pub fn boundary(_ctx: &Context, a: &BoundaryArgs) -> Outcome {
    let mus = if a.mu_list.is_empty() {
        let v = parse_range(&a.mu_log)?;
        if v.len() < 2 || !(v[0] > 0.0) {
            return Err(QfiError::InvalidInput("--mu-log needs positive lo and count >= 2".into()));
        }
        log_spaced(v[0], v[v.len() - 1], v.len())
    } else {
        a.mu_list.clone()
    };
    let sign = match a.sign {
        Sign::Plus => BoundarySign::Plus,
        Sign::Minus => BoundarySign::Minus,
    };
    let options = BoundaryOptions {
        odd_mu_floor: a.odd_mu_floor,
        ..BoundaryOptions::default()
    };
    let points = boundary_scan(a.n, sign, &mus, &options)?;
    let mut t = Table::new(&["mu", "jz", "jx2", "var_jx", "fq", "archetype_bound", "rel_diff", "degenerate"]);
    for p in points {
        t.push(vec![
            p.mu.into(),
            p.jz.into(),
            p.jx2.into(),
            p.var_jx.into(),
            p.fq.into(),
            p.archetype_bound.into(),
            p.rel_diff.into(),
            p.degenerate.into(),
        ]);
    }
    Ok((t, false))
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Record file, one JSON object per line.
    #[arg(long)]
    input: std::path::PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "200,300,400")]
    squeezing_n_primes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "400,600,800,1000")]
    dicke_n_primes: Vec<usize>,
}

pub fn experiment(ctx: &Context, a: &ExperimentArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| QfiError::InvalidInput(format!("cannot read {}: {e}", a.input.display())))?;
    let records = parse_records(&text)?;
    let options = EvaluationOptions {
        settings: ctx.settings.clone(),
        squeezing_n_primes: a.squeezing_n_primes.clone(),
        dicke_n_primes: a.dicke_n_primes.clone(),
    };
    let results = records
        .par_iter()
        .map(|r| evaluate_record(r, &options))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&[
        "name",
        "n",
        "family",
        "bound",
        "bound_sigma",
        "bound_per_n",
        "bound_per_n2",
        "depth_k",
        "representation",
        "certified_flag",
    ]);
    for r in results {
        t.push(vec![
            r.name.into(),
            r.n.into(),
            r.family.to_string().into(),
            r.bound.into(),
            r.bound_sigma.into(),
            r.bound_per_n.into(),
            r.bound_per_n2.into(),
            r.depth_k.into(),
            r.representation.into(),
            r.certified_flag.into(),
        ]);
    }
    Ok((t, false))
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScalingMode {
    Squeezing,
    Dicke,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long, value_enum)]
    mode: ScalingMode,
    /// Particle number of the experiment (default 2300 squeezing, 7900 Dicke).
    #[arg(long)]
    n: Option<usize>,
    /// Ascending N' values (default 50,100,200,300,400 squeezing; 400,600,800,1000 Dicke).
    #[arg(long, value_delimiter = ',')]
    n_primes: Vec<usize>,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1514)]
    xi2: f64,
    #[arg(long, default_value_t = 112.0)]
    jz2: f64,
    #[arg(long, default_value_t = 6e6)]
    jx2: f64,
    #[arg(long, default_value_t = 6e6)]
    jy2: f64,
    /// Independent cold starts in parallel instead of the warm-started chain.
    #[arg(long)]
    cold: bool,
}

pub fn scaling(ctx: &Context, a: &ScalingArgs) -> Outcome {
    let mode = if a.cold { ScanMode::ColdParallel } else { ScanMode::WarmChain };
    let run: ScalingRun = match a.mode {
        ScalingMode::Squeezing => {
            let n_primes = if a.n_primes.is_empty() { vec![50, 100, 200, 300, 400] } else { a.n_primes.clone() };
            squeezing_convergence(a.alpha, a.xi2, a.n.unwrap_or(2300), &n_primes, &ctx.settings, mode)?
        }
        ScalingMode::Dicke => {
            let n = a.n.unwrap_or(7900);
            let n_primes = if a.n_primes.is_empty() { vec![400, 600, 800, 1000] } else { a.n_primes.clone() };
            let sym = symmetrize_moments(a.jx2, a.jy2, a.jz2, n)?;
            dicke_extrapolation(sym.jz2, n, sym.gamma, &n_primes, &ctx.settings, mode)?
        }
    };
    let mut t = Table::new(&[
        "kind",
        "n_prime",
        "bound",
        "value_per_n",
        "archetype_per_n",
        "iterations",
        "gamma",
        "spread",
        "plateau",
    ]);
    for (i, &np) in run.n_primes.iter().enumerate() {
        t.push(vec![
            "sample".into(),
            np.into(),
            run.bounds[i].into(),
            run.bounds_per_n[i].into(),
            run.archetype_per_n.get(i).copied().into(),
            run.iterations[i].into(),
            run.gamma.into(),
            Cell::Missing,
            Cell::Missing,
        ]);
    }
    t.push(vec![
        EXTRAPOLATED_LABEL.into(),
        run.n_target.into(),
        Cell::Missing,
        run.extrapolated.into(),
        Cell::Missing,
        Cell::Missing,
        run.gamma.into(),
        run.spread.into(),
        run.plateau.into(),
    ]);
    Ok((t, false))
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

pub fn validate(ctx: &Context, a: &ValidateArgs) -> Outcome {
    let samples = soundness_suite(a.n, a.samples, ctx.seed, &ctx.settings)?;
    let failed = samples.iter().any(|s| !s.ok);
    let mut t = Table::new(&["index", "kind", "bound", "exact_qfi", "ok"]);
    for s in samples {
        t.push(vec![
            s.index.into(),
            s.kind.to_string().into(),
            s.bound.into(),
            s.exact_qfi.into(),
            s.ok.into(),
        ]);
    }
    Ok((t, failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("0:1:101").unwrap().len(), 101);
        assert_eq!(parse_range("2:5:1").unwrap(), vec![2.0]);
        for bad in ["0:1", "a:1:2", "0:1:0", "0:inf:3"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }
}
