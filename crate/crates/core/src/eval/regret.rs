//! Regret against the best fixed arm of an evaluation grid, by replaying
//! the environment.

use serde::Serialize;

use super::EvalError;
use crate::algo::Trace;
use crate::env::Environment;
use crate::metric::{ActionSpace, Arm};
use crate::parallel::Exec;

/// Upper bound on arm-round evaluations in one replay.
pub const MAX_EVALUATIONS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub rounds: usize,
    pub grid_eps: f64,
    pub grid_size: usize,
    pub best_arm: Arm,
    pub best_total: f64,
    pub algorithm_total: f64,
    pub regret: f64,
    /// `T * grid_eps`: how far the grid optimum can trail the true optimum.
    pub lipschitz_slack: f64,
    #[serde(skip)]
    pub cum_reward: Vec<f64>,
    /// Best grid arm's cumulative reward after each round (the running max).
    #[serde(skip)]
    pub cum_best: Vec<f64>,
}

impl RegretReport {
    /// `cum_best[t] - cum_reward[t]` per round.
    pub fn regret_curve(&self) -> Vec<f64> {
        self.cum_best.iter().zip(&self.cum_reward).map(|(b, a)| b - a).collect()
    }
}

/// Default grid: `1/1024` for `d = 1`, `1/64` per axis for `d = 2`, `1/8`
/// beyond; doubled until a replay of `rounds` rounds fits the evaluation
/// guard. Finite spaces use every point (`eps = 0`).
pub fn default_regret_grid_eps(space: &ActionSpace, rounds: usize) -> f64 {
    let d = match space {
        ActionSpace::Cube { d } => *d,
        ActionSpace::Finite(_) => return 0.0,
    };
    let mut eps: f64 = match d {
        1 => 1.0 / 1024.0,
        2 => 1.0 / 64.0,
        _ => 1.0 / 8.0,
    };
    while eps < 1.0 && rounds.saturating_mul(((1.0 / eps).ceil() as usize).pow(d as u32)) > MAX_EVALUATIONS {
        eps *= 2.0;
    }
    eps
}

/// Evaluation arms for `eps`; finite spaces ignore `eps`.
pub fn evaluation_grid(space: &ActionSpace, eps: f64) -> Vec<Arm> {
    match space {
        ActionSpace::Finite(_) => space.grid(1.0),
        ActionSpace::Cube { .. } => space.grid(eps),
    }
}

struct ChunkBest {
    running: Vec<f64>,
    best_arm: usize,
    best_total: f64,
}

/// Replays every grid arm for `rounds` rounds; `reward(t, y)` is `g_t(y)`.
fn replay_best(
    grid: &[Arm],
    rounds: usize,
    exec: Exec,
    reward: impl Fn(usize, &Arm) -> f64 + Sync + Send,
) -> ChunkBest {
    let chunk = grid.len().div_ceil(64).max(1);
    let parts = exec.map_chunks(grid.len(), chunk, |range| {
        let mut running = vec![f64::NEG_INFINITY; rounds];
        let mut best_arm = range.start;
        let mut best_total = f64::NEG_INFINITY;
        for i in range {
            let mut acc = 0.0;
            for (k, slot) in running.iter_mut().enumerate() {
                acc += reward(k + 1, &grid[i]);
                if acc > *slot {
                    *slot = acc;
                }
            }
            if acc > best_total {
                best_total = acc;
                best_arm = i;
            }
        }
        ChunkBest { running, best_arm, best_total }
    });
    let mut it = parts.into_iter();
    let mut acc = it.next().unwrap_or(ChunkBest { running: vec![0.0; rounds], best_arm: 0, best_total: 0.0 });
    for p in it {
        acc.running.iter_mut().zip(&p.running).for_each(|(a, b)| *a = a.max(*b));
        if p.best_total > acc.best_total {
            acc.best_total = p.best_total;
            acc.best_arm = p.best_arm;
        }
    }
    acc
}

/// Regret of `trace` against the grid. The grid is checked against the
/// evaluation guard first.
pub fn regret(
    trace: &Trace,
    env: &Environment,
    grid_eps: f64,
    exec: Exec,
) -> Result<RegretReport, EvalError> {
    let rounds = trace.rounds();
    let grid = evaluation_grid(&env.space, grid_eps);
    if rounds.saturating_mul(grid.len()) > MAX_EVALUATIONS {
        return Err(EvalError::GridTooLarge { arms: grid.len(), rounds, limit: MAX_EVALUATIONS });
    }
    if rounds > env.horizon {
        return Err(EvalError::Mismatch(format!("trace has {rounds} rounds, environment {}", env.horizon)));
    }
    let best = replay_best(&grid, rounds, exec, |t, y| env.reward_unchecked(env.seed, t, y));
    let cum_reward = trace.cumulative_rewards();
    let algorithm_total = cum_reward.last().copied().unwrap_or(0.0);
    let slack = match env.space {
        ActionSpace::Finite(_) => 0.0,
        ActionSpace::Cube { .. } => rounds as f64 * grid_eps,
    };
    Ok(RegretReport {
        rounds,
        grid_eps,
        grid_size: grid.len(),
        best_arm: grid[best.best_arm].clone(),
        best_total: best.best_total,
        algorithm_total,
        regret: best.best_total - algorithm_total,
        lipschitz_slack: slack,
        cum_reward,
        cum_best: best.running,
    })
}
