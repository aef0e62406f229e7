mod common;

use adzoom::algo::{AlgConfig, AlgState};
use adzoom::env::{Environment, Preset};
use adzoom::metric::ActionSpace;

use common::{run_oracle, OracleRound};

pub struct Mismatch {
    pub t: usize,
    pub what: String,
}

/// Steps the incremental implementation and the oracle side by side.
pub fn compare(env: &Environment, space: &ActionSpace, horizon: usize, seed: u64) -> Result<f64, Mismatch> {
    let oracle: Vec<OracleRound> = run_oracle(env, horizon, seed);
    let mut state = AlgState::init(space, AlgConfig::new(horizon, seed)).unwrap();
    let mut worst = 0.0f64;
    for o in &oracle {
        let t = state.t();
        let eta = state.schedule().clone().next(state.active().len()).eta;
        if (eta - o.eta).abs() > 1e-12 * o.eta {
            return Err(Mismatch { t, what: format!("eta {eta} vs {}", o.eta) });
        }
        let lw = state.log_weights(eta);
        if lw.len() != o.log_weights.len() {
            return Err(Mismatch { t, what: format!("|A_t| {} vs {}", lw.len(), o.log_weights.len()) });
        }
        for (a, b) in lw.iter().zip(&o.log_weights) {
            let rel = (a - b).abs() / b.abs().max(1.0);
            worst = worst.max(rel);
            if rel > 1e-9 {
                return Err(Mismatch { t, what: format!("log-weight {a} vs {b}") });
            }
        }
        let rec = state.step(env).unwrap();
        if rec.node != o.chosen {
            return Err(Mismatch { t, what: format!("node {} vs {}", rec.node, o.chosen) });
        }
        if rec.arm.coords().unwrap()[0] != o.arm {
            return Err(Mismatch { t, what: format!("arm {} vs {}", rec.arm, o.arm) });
        }
    }
    Ok(worst)
}

#[test]
fn incremental_weights_match_naive_table() {
    let space = ActionSpace::cube(1).unwrap();
    for seed in 0..5u64 {
        let env = Preset::DistanceToTarget.spec().build(&space, 200, 100 + seed).unwrap();
        if let Err(m) = compare(&env, &space, 200, seed) {
            panic!("seed {seed}, round {}: {}", m.t, m.what);
        }
    }
}

#[test]
fn oracle_agrees_on_every_preset() {
    let space = ActionSpace::cube(1).unwrap();
    for preset in [Preset::Concave, Preset::Combined2, Preset::PricingUniform] {
        let env = preset.spec().build(&space, 300, 9).unwrap();
        if let Err(m) = compare(&env, &space, 300, 77) {
            panic!("{preset:?}, round {}: {}", m.t, m.what);
        }
    }
}

#[test]
fn oracle_zooms_at_least_once() {
    let space = ActionSpace::cube(1).unwrap();
    let env = Preset::DistanceToTarget.spec().build(&space, 200, 1).unwrap();
    let rounds = run_oracle(&env, 200, 3);
    assert!(rounds.last().unwrap().log_weights.len() > 1);
}

#[test]
fn split_conserves_weight() {
    // sum of the children's weights equals the parent's at the split
    let space = ActionSpace::cube(1).unwrap();
    let env = Preset::Concave.spec().build(&space, 256, 4).unwrap();
    let mut state = AlgState::init(&space, AlgConfig::new(256, 8)).unwrap();
    while !state.is_done() {
        let parent_log_c: Vec<(usize, f64)> = state.active().iter().map(|u| (u.id, u.log_c_prod)).collect();
        let eta = 0.25;
        let zooms = state.step(&env).unwrap().zooms.clone();
        for z in zooms {
            let kids: Vec<_> = state.active().iter().filter(|u| z.children.contains(&u.id)).collect();
            assert_eq!(kids.len(), 2);
            let c = parent_log_c.iter().find(|b| b.0 == z.node).unwrap().1;
            // children inherit the parent's post-update estimate sum
            let lw_parent = eta * kids[0].g_hat - c;
            let total: f64 = kids.iter().map(|u| (eta * u.g_hat - u.log_c_prod - lw_parent).exp()).sum();
            assert!((total - 1.0).abs() < 1e-9, "{total}");
        }
    }
}
