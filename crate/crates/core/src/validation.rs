//! Soundness checks of the bound engine against the exact QFI of random
//! mixed states.

use serde::Serialize;

use crate::bound::{exact_qfi, lower_bound_multi, BoundProblem, Constraint, OptimizerSettings};
use crate::error::Result;
use crate::linalg::expectation;
use crate::random::{random_density_matrix, rng_from_seed};
use crate::spin::{build_collective, dicke_state, ghz_state, projector, Representation, RepresentationKind};

/// Slack allowed between a bound and the exact QFI.
pub const SOUNDNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleKind {
    /// GHZ fidelity, generator `J_z`.
    GhzFidelity,
    /// Half-excited Dicke fidelity, generator `J_y`.
    DickeFidelity,
    /// `{<J_z>, <J_x^2>, <J_x>}`, generator `J_y`.
    Moments,
}

impl std::fmt::Display for SampleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleKind::GhzFidelity => "ghz-fidelity",
            SampleKind::DickeFidelity => "dicke-fidelity",
            SampleKind::Moments => "moments",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessSample {
    pub index: usize,
    pub kind: SampleKind,
    pub bound: f64,
    pub exact_qfi: f64,
    pub ok: bool,
}

/// Draws `samples` random mixed states of `n` qubits (full representation)
/// and checks each bound from the state's own expectation values against
/// its exact QFI. Kinds rotate through [`SampleKind`].
pub fn soundness_suite(n: usize, samples: usize, seed: u64, settings: &OptimizerSettings) -> Result<Vec<SoundnessSample>> {
    let rep = Representation::full(n)?;
    let spins = build_collective::<f64>(rep);
    let ghz = projector(&ghz_state::<f64>(rep));
    let dicke = projector(&dicke_state::<f64>(rep, n / 2)?);
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(samples);
    for index in 0..samples {
        let rho = random_density_matrix::<f64, _>(rep.dim(), 1 + index % rep.dim(), &mut rng);
        let kind = match index % 3 {
            0 => SampleKind::GhzFidelity,
            1 => SampleKind::DickeFidelity,
            _ => SampleKind::Moments,
        };
        let (generator, constraints) = match kind {
            SampleKind::GhzFidelity => (&spins.jz, vec![Constraint::new(ghz.clone(), expectation(&ghz, &rho)?, "ghz")]),
            SampleKind::DickeFidelity => (
                &spins.jy,
                vec![Constraint::new(dicke.clone(), expectation(&dicke, &rho)?, "dicke")],
            ),
            SampleKind::Moments => (
                &spins.jy,
                [("jz", &spins.jz), ("jx2", &spins.jx2), ("jx", &spins.jx)]
                    .into_iter()
                    .map(|(label, op)| Ok(Constraint::new(op.clone(), expectation(op, &rho)?, label)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let problem = BoundProblem::new(generator.clone(), constraints, n, RepresentationKind::Full)
            .with_settings(settings.clone());
        let bound = lower_bound_multi(&problem)?.bound;
        let exact = exact_qfi(&rho, generator)?;
        out.push(SoundnessSample {
            index,
            kind,
            bound,
            exact_qfi: exact,
            ok: bound <= exact + SOUNDNESS_TOL,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_sound() {
        let s = soundness_suite(2, 6, 7, &OptimizerSettings::default()).unwrap();
        assert_eq!(s.len(), 6);
        assert!(s.iter().all(|x| x.ok), "{s:?}");
    }
}
