//! AdversarialZooming: EXP3.P-style selection over an adaptively refined
//! partition of the action space.

pub mod assumptions;
pub mod hierarchy;
pub mod params;
pub mod state;
pub mod trace;

pub use assumptions::{check_assumptions, AssumptionReport, AssumptionViolation, Clause};
pub use hierarchy::{dag_height, Hierarchy, Region};
pub use params::{log2_horizon, params, ParamMode, ParamSchedule, Params};
pub use state::{
    conf_terms, confidence_bonus, mixed_distribution, run, zoom_rule, AlgConfig, AlgError, AlgState,
    NodeState,
};
pub use trace::{AlgorithmKind, NodeId, NodeInfo, Phase, RoundRecord, Trace, ZoomEvent};

use crate::env::Environment;
use crate::metric::ActionSpace;

/// Phase horizons `1, 2, 4, ...` covering `rounds`; the last phase may be
/// cut short.
pub fn doubling_phases(rounds: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut used = 0;
    let mut horizon = 1;
    while used < rounds {
        out.push((horizon, horizon.min(rounds - used)));
        used += horizon;
        horizon *= 2;
    }
    out
}

/// Doubling trick: fresh state with `T = 2^i` for phase `i`, each phase
/// reading the environment where the previous one stopped.
pub fn run_anytime(
    space: &ActionSpace,
    env: &Environment,
    base: &AlgConfig,
    rounds: usize,
) -> Result<Trace, AlgError> {
    if rounds == 0 {
        return Err(AlgError::ZeroHorizon);
    }
    let mut phases = Vec::new();
    let mut offset = base.env_offset;
    for (i, (horizon, len)) in doubling_phases(rounds).into_iter().enumerate() {
        let config = AlgConfig {
            horizon,
            seed: crate::rng::derive_seed(base.seed, i as u64),
            env_offset: offset,
            ..base.clone()
        };
        let mut s = AlgState::init(space, config)?;
        for _ in 0..len {
            s.step(env)?;
        }
        phases.push(s.into_phase());
        offset += len;
    }
    Ok(Trace { phases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Preset;

    #[test]
    fn phase_lengths() {
        assert_eq!(doubling_phases(7), vec![(1, 1), (2, 2), (4, 4)]);
        assert_eq!(doubling_phases(1), vec![(1, 1)]);
        assert_eq!(doubling_phases(5), vec![(1, 1), (2, 2), (4, 2)]);
    }

    #[test]
    fn anytime_concatenates_phases() {
        let space = ActionSpace::cube(1).unwrap();
        let env = Preset::DistanceToTarget.spec().build(&space, 100, 1).unwrap();
        let trace = run_anytime(&space, &env, &AlgConfig::new(1, 6), 100).unwrap();
        assert_eq!(trace.rounds(), 100);
        let rounds: Vec<usize> = trace.iter_global().map(|(t, _)| t).collect();
        assert_eq!(rounds, (1..=100).collect::<Vec<_>>());
        let sum: f64 = trace.phases.iter().map(|p| p.total_reward()).sum();
        assert_eq!(sum, trace.total_reward());
    }
}
