use adzoom::algo::{log2_horizon, AlgConfig, AlgState, ParamMode};
use adzoom::baselines::{Exp3PParams, Exp3PState};
use adzoom::env::Preset;
use adzoom::metric::ActionSpace;

/// With zooming off, AdversarialZooming over a fixed level of the tree is
/// EXP3.P on that level's representatives once the confidence constant
/// `1 + 4 log2 T` is folded into the baseline's `beta`.
fn compare(level: u32, horizon: usize, seed: u64) {
    let space = ActionSpace::cube(1).unwrap();
    let env = Preset::Concave.spec().build(&space, horizon, seed + 10).unwrap();
    let (beta, gamma, eta) = (0.01, 0.2, 0.01);

    let mut cfg = AlgConfig::new(horizon, seed);
    cfg.zoom = false;
    cfg.init_level = level;
    cfg.params = ParamMode::Constant { beta, beta_tilde: beta, gamma, eta };
    let mut az = AlgState::init(&space, cfg).unwrap();

    let arms: Vec<_> = az.active().iter().map(|u| u.arm.clone()).collect();
    assert_eq!(arms.len(), 1 << level);
    let matched = Exp3PParams { beta: (1.0 + 4.0 * log2_horizon(horizon)) * beta, gamma, eta };
    let mut ex = Exp3PState::new(arms, 0.5f64.powi(level as i32), horizon, seed, matched).unwrap();

    while !az.is_done() {
        let a = az.step(&env).unwrap().clone();
        let b = ex.step(&env).unwrap();
        assert_eq!(a.node, b.node, "round {}", a.t);
        assert_eq!(a.arm, b.arm);
        assert_eq!(a.reward, b.reward);
        assert_eq!(a.n_active, 1 << level);
    }
}

#[test]
fn four_fixed_nodes_match_exp3p() {
    for seed in 0..5 {
        compare(2, 2000, seed);
    }
}

#[test]
fn eight_fixed_nodes_match_exp3p() {
    compare(3, 3000, 42);
}

#[test]
fn distributions_agree_every_round() {
    let space = ActionSpace::cube(1).unwrap();
    let horizon = 1500;
    let env = Preset::DistanceToTarget.spec().build(&space, horizon, 3).unwrap();
    let (beta, gamma, eta) = (0.02, 0.1, 0.02);
    let mut cfg = AlgConfig::new(horizon, 9);
    cfg.zoom = false;
    cfg.init_level = 2;
    cfg.record_pi = true;
    cfg.params = ParamMode::Constant { beta, beta_tilde: beta, gamma, eta };
    let mut az = AlgState::init(&space, cfg).unwrap();
    let arms: Vec<_> = az.active().iter().map(|u| u.arm.clone()).collect();
    let matched = Exp3PParams { beta: (1.0 + 4.0 * log2_horizon(horizon)) * beta, gamma, eta };
    let mut ex = Exp3PState::new(arms, 0.25, horizon, 9, matched).unwrap();
    while !az.is_done() {
        let pi_ex = ex.distribution();
        let rec = az.step(&env).unwrap();
        for ((_, p), q) in rec.pi.as_ref().unwrap().iter().zip(&pi_ex) {
            assert!((p - q).abs() <= 1e-12, "round {}: {p} vs {q}", rec.t);
        }
        ex.step(&env).unwrap();
    }
}
