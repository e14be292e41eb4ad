mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qfi_core::analytic::{
    boundary_scan, dicke_scaling_scan, dicke_threshold, ghz_bound, ghz_fidelity_bound, log_spaced, BoundaryOptions,
    BoundarySign,
};
use qfi_core::bound::{
    exact_qfi, legendre_qfi, lower_bound_multi, supergradient, BoundProblem, Constraint, OptimizerSettings,
};
use qfi_core::experiments::{squeezing_convergence, symmetrize_moments, ScanMode};
use qfi_core::linalg::{eig_full, expectation, ground_state, lambda_max, variance};
use qfi_core::random::{random_density_matrix, random_state, rng_from_seed};
use qfi_core::spin::{build_collective, dicke_state, ghz_state, projector, Representation, RepresentationKind};
use qfi_core::{Density, Operator};

fn hermitian(dim: usize, raw: &[f64]) -> Operator {
    let mut e = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let k = 2 * (i * dim + j);
            let z = if i == j {
                Complex64::new(raw[k], 0.0)
            } else {
                Complex64::new(raw[k], raw[k + 1])
            };
            e[i * dim + j] = z;
            e[j * dim + i] = z.conj();
        }
    }
    Operator::from_dense(dim, e).unwrap()
}

fn hermitian_strategy(max_dim: usize) -> impl Strategy<Value = Operator> {
    (1..=max_dim).prop_flat_map(|d| prop::collection::vec(-1.0f64..1.0, 2 * d * d).prop_map(move |v| hermitian(d, &v)))
}

fn norm(h: &Operator) -> f64 {
    h.frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_max_is_top_of_full_spectrum(h in hermitian_strategy(24)) {
        let (top, v) = lambda_max(&h).unwrap();
        let (values, _) = eig_full(&h).unwrap();
        let oracle = common::lambda_max(&common::dense(&h));
        let scale = norm(&h).max(1.0);
        prop_assert!((top - values[values.len() - 1]).abs() <= 1e-8 * scale);
        prop_assert!((top - oracle).abs() <= 1e-8 * scale);
        let hv = h.apply(v.amplitudes());
        let residual: f64 = hv
            .iter()
            .zip(v.amplitudes())
            .map(|(a, b)| (a - b * top).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(residual <= 1e-9 * scale);
    }

    #[test]
    fn ground_state_is_negated_top(h in hermitian_strategy(16)) {
        let (g, _) = ground_state(&h).unwrap();
        let (t, _) = lambda_max(&h.scaled(-1.0)).unwrap();
        prop_assert_eq!(g, -t);
    }

    #[test]
    fn eig_full_reconstructs(raw in prop::collection::vec(-1.0f64..1.0, 128)) {
        let h = hermitian(8, &raw);
        let (values, vectors) = eig_full(&h).unwrap();
        let dense = h.to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let rebuilt: Complex64 = (0..8)
                    .map(|k| vectors[k].amplitudes()[i] * vectors[k].amplitudes()[j].conj() * values[k])
                    .sum();
                worst = worst.max((rebuilt - dense[i * 8 + j]).norm());
            }
            for j in 0..8 {
                let overlap = vectors[i].inner(&vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((overlap - want).norm() <= 1e-9);
            }
        }
        prop_assert!(worst <= 1e-8 * norm(&h));
    }

    #[test]
    fn expectation_stays_below_lambda_max(h in hermitian_strategy(16), seed in any::<u64>()) {
        let v = random_state::<f64, _>(h.dim(), &mut rng_from_seed(seed));
        let (top, _) = lambda_max(&h).unwrap();
        prop_assert!(expectation(&h, &v).unwrap() <= top + 1e-9 * norm(&h).max(1.0));
    }

    #[test]
    fn variance_is_nonnegative(h in hermitian_strategy(12), seed in any::<u64>(), rank in 1usize..4) {
        let rho: Density = random_density_matrix(h.dim(), rank.min(h.dim()), &mut rng_from_seed(seed));
        prop_assert!(variance(&h, &rho).unwrap() >= -1e-10);
        let v = random_state::<f64, _>(h.dim(), &mut rng_from_seed(seed ^ 1));
        prop_assert!(variance(&h, &v).unwrap() >= -1e-10);
    }

    #[test]
    fn exact_qfi_matches_dense_oracle(seed in any::<u64>(), n in 1usize..4, rank in 1usize..5) {
        let rep = Representation::full(n).unwrap();
        let spins = build_collective::<f64>(rep);
        let rho: Density = random_density_matrix(rep.dim(), rank.min(rep.dim()), &mut rng_from_seed(seed));
        for a in [&spins.jx, &spins.jy, &spins.jz] {
            let got = exact_qfi(&rho, a).unwrap();
            let want = common::qfi(&rho, a);
            prop_assert!((got - want).abs() <= 1e-8 * want.max(1.0), "{} vs {}", got, want);
        }
    }

    #[test]
    fn symmetrized_moments_hit_the_casimir_value(
        jx2 in 0.1f64..1e4, jy2 in 0.1f64..1e4, jz2 in 0.0f64..1e3, n in 2usize..2000,
    ) {
        let s = symmetrize_moments(jx2, jy2, jz2, n).unwrap();
        let casimir = n as f64 / 2.0 * (n as f64 / 2.0 + 1.0);
        prop_assert!((s.jx2 + s.jy2 + s.jz2 - casimir).abs() <= 1e-12 * casimir);
        prop_assert!((s.jz2 - s.gamma * jz2).abs() <= 1e-12 * casimir);
    }
}

fn moment_problem(rho: &Density, n: usize, with_jx: bool) -> BoundProblem<f64> {
    let spins = build_collective::<f64>(Representation::full(n).unwrap());
    let mut ops = vec![(&spins.jz, "jz"), (&spins.jx2, "jx2")];
    if with_jx {
        ops.push((&spins.jx, "jx"));
    }
    let constraints = ops
        .into_iter()
        .map(|(op, label)| Constraint::new(op.clone(), expectation(op, rho).unwrap(), label))
        .collect();
    BoundProblem::new(spins.jy.clone(), constraints, n, RepresentationKind::Full)
}

#[test]
fn dual_objective_is_concave_in_r() {
    let mut rng = rng_from_seed(77);
    let rho: Density = random_density_matrix(8, 3, &mut rng);
    let problem = moment_problem(&rho, 3, true);
    let mut draw = |scale: f64| -> Vec<f64> {
        let v = random_state::<f64, _>(3, &mut rng);
        v.amplitudes().iter().map(|z| z.re * scale).collect()
    };
    for trial in 0..40 {
        let (r1, r2) = (draw(6.0), draw(6.0));
        let lambda = (trial as f64 + 0.5) / 40.0;
        let mid: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let (f1, _) = supergradient(&problem, &r1).unwrap();
        let (f2, _) = supergradient(&problem, &r2).unwrap();
        let (fm, _) = supergradient(&problem, &mid).unwrap();
        assert!(fm >= lambda * f1 + (1.0 - lambda) * f2 - 1e-8, "trial {trial}");
    }
}

#[test]
fn extra_constraint_never_lowers_the_bound() {
    let mut rng = rng_from_seed(31);
    for _ in 0..8 {
        let rho: Density = random_density_matrix(8, 2, &mut rng);
        let spins = build_collective::<f64>(Representation::full(3).unwrap());
        let fewer = lower_bound_multi(&moment_problem(&rho, 3, false)).unwrap().bound;
        let more = lower_bound_multi(&moment_problem(&rho, 3, true)).unwrap().bound;
        let exact = exact_qfi(&rho, &spins.jy).unwrap();
        assert!(more >= fewer - 1e-6 * fewer.max(1.0), "{more} < {fewer}");
        assert!(more <= exact + 1e-6, "{more} > exact {exact}");
    }
}

#[test]
fn unique_ground_state_constraints_are_tight() {
    let n = 4;
    let rep = Representation::symmetric(n).unwrap();
    let spins = build_collective::<f64>(rep);
    for mu in [0.3, 1.0, 3.0] {
        let h = spins.jx2.add_scaled(&spins.jz, -mu).unwrap();
        let (_, psi) = ground_state(&h).unwrap();
        let constraints = vec![
            Constraint::new(spins.jz.clone(), expectation(&spins.jz, &psi).unwrap(), "jz"),
            Constraint::new(spins.jx2.clone(), expectation(&spins.jx2, &psi).unwrap(), "jx2"),
        ];
        let problem = BoundProblem::new(spins.jy.clone(), constraints, n, RepresentationKind::Symmetric);
        let bound = lower_bound_multi(&problem).unwrap().bound;
        let exact = 4.0 * variance(&spins.jy, &psi).unwrap();
        assert!((bound - exact).abs() <= 1e-4 * exact, "mu {mu}: {bound} vs {exact}");
    }
}

#[test]
fn inner_supremum_is_stable_under_grid_refinement() {
    let coarse = OptimizerSettings::default();
    let fine = OptimizerSettings {
        mu_grid_points: 801,
        ..OptimizerSettings::default()
    };
    for n in [4usize, 6, 8] {
        let rep = Representation::symmetric(n).unwrap();
        let spins = build_collective::<f64>(rep);
        let targets = [
            (projector(&ghz_state::<f64>(rep)), &spins.jz),
            (projector(&dicke_state::<f64>(rep, n / 2).unwrap()), &spins.jy),
        ];
        for (w, a) in &targets {
            for r in [0.5, 3.0, (n * n) as f64, 5.0 * (n * n) as f64] {
                let (v1, _, _) = legendre_qfi(&w.scaled(r), a, &coarse).unwrap();
                let (v2, _, _) = legendre_qfi(&w.scaled(r), a, &fine).unwrap();
                assert!((v1 - v2).abs() <= 1e-6 * v2.abs().max(1.0), "n {n} r {r}: {v1} vs {v2}");
                let oracle = common::legendre(&w.scaled(r), a);
                assert!((v1 - oracle).abs() <= 1e-6 * oracle.abs().max(1.0), "n {n} r {r}: {v1} vs {oracle}");
            }
        }
    }
}

#[test]
fn fidelity_curves_are_convex_and_nondecreasing() {
    let s = OptimizerSettings::default();
    let n = 6;
    let fs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let numeric: Vec<f64> = fs
        .iter()
        .map(|&f| ghz_fidelity_bound(n, f, RepresentationKind::Symmetric, &s).unwrap().bound)
        .collect();
    for (i, &f) in fs.iter().enumerate() {
        let closed = ghz_bound(f, n).unwrap();
        assert!((numeric[i] - closed).abs() <= 1e-6 * closed.max(1.0), "F={f}");
    }
    for w in numeric.windows(3) {
        assert!(w[1] >= w[0] - 1e-9 && w[2] >= w[1] - 1e-9);
        assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-6 * w[2].max(1.0), "{w:?}");
    }
}

#[test]
fn plus_boundary_is_monotone() {
    for n in [4usize, 10, 20] {
        let mu = log_spaced(1e-3, 1e3, 61);
        let points = boundary_scan(n, BoundarySign::Plus, &mu, &BoundaryOptions::default()).unwrap();
        let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.jz, p.jx2)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in sorted.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-9, "n {n}: {w:?}");
        }
    }
}

#[test]
fn dicke_threshold_approaches_its_asymptote() {
    for n in [100usize, 200, 500, 1000, 4000] {
        let t = dicke_threshold(n).unwrap();
        let asymptote = (2.0 / (std::f64::consts::PI * n as f64)).sqrt();
        assert!((t - asymptote).abs() <= 0.02 * asymptote, "n {n}: {t} vs {asymptote}");
        assert!((t - common::central_binomial_weight(n)).abs() <= 1e-12);
    }
}

#[test]
fn dicke_fidelity_bound_grows_quadratically() {
    let ns: Vec<usize> = (1..=10).map(|k| 50 * k).collect();
    for f in [0.2, 0.5, 0.8] {
        let points = dicke_scaling_scan(&ns, f, &OptimizerSettings::default()).unwrap();
        let last = points.last().unwrap().bound_per_n2;
        assert!(last > 0.0);
        for p in points.iter().filter(|p| p.n >= 300) {
            assert!((p.bound_per_n2 - last).abs() <= 0.1 * last, "F={f} N={}: {}", p.n, p.bound_per_n2);
        }
    }
}

#[test]
fn squeezing_plateau_is_flat_and_nonincreasing() {
    let n_primes = [50usize, 100, 200, 400];
    let run = squeezing_convergence(0.85, 0.1514, 2300, &n_primes, &OptimizerSettings::default(), ScanMode::WarmChain)
        .unwrap();
    for w in run.bounds_per_n.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-6), "{:?}", run.bounds_per_n);
    }
    let tail = &run.bounds_per_n[2..];
    let spread = (tail[0] - tail[tail.len() - 1]).abs() / tail[0];
    assert!(spread < 0.005, "{:?}", run.bounds_per_n);
}
