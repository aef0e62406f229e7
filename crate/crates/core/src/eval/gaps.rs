//! Adversarial gaps and inclusively eps-optimal arm sets.

use serde::Serialize;

use crate::env::Environment;
use crate::metric::Arm;
use crate::parallel::Exec;

/// `gap_t(x)` for every grid arm at each requested round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTable {
    pub times: Vec<usize>,
    /// `gaps[k][i]`: gap of grid arm `i` at `times[k]`.
    pub gaps: Vec<Vec<f64>>,
}

/// Cumulative sums `sum_{tau <= t} f(tau, y)` for each arm at each of
/// `times` (sorted ascending).
fn cumulative_at(
    grid: &[Arm],
    times: &[usize],
    exec: Exec,
    f: impl Fn(usize, &Arm) -> f64 + Sync + Send,
) -> Vec<Vec<f64>> {
    let last = times.last().copied().unwrap_or(0);
    exec.map(grid, |y| {
        let mut out = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        let mut k = 0;
        for t in 1..=last {
            acc += f(t, y);
            while k < times.len() && times[k] == t {
                out.push(acc);
                k += 1;
            }
        }
        out
    })
}

fn table_from(cum: Vec<Vec<f64>>, times: &[usize]) -> GapTable {
    let gaps = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let best = cum.iter().map(|c| c[k]).fold(f64::NEG_INFINITY, f64::max);
            cum.iter().map(|c| (best - c[k]) / t as f64).collect()
        })
        .collect();
    GapTable { times: times.to_vec(), gaps }
}

fn sorted_times(times: &[usize], horizon: usize) -> Vec<usize> {
    let mut t: Vec<usize> = times.iter().copied().filter(|&t| t >= 1 && t <= horizon).collect();
    t.sort_unstable();
    t.dedup();
    t
}

/// Realized adversarial gaps `(1/t) max_y sum_{tau <= t} (g_tau(y) - g_tau(x))`.
pub fn gap_table(env: &Environment, grid: &[Arm], times: &[usize], exec: Exec) -> GapTable {
    let times = sorted_times(times, env.horizon);
    let cum = cumulative_at(grid, &times, exec, |t, y| env.reward_unchecked(env.seed, t, y));
    table_from(cum, &times)
}

/// The same gaps computed on expected rewards; for a stochastic instance
/// this is `max_y mu(y) - mu(x)` at every `t`.
pub fn mean_gap_table(env: &Environment, grid: &[Arm], times: &[usize], exec: Exec) -> GapTable {
    let times = sorted_times(times, env.horizon);
    let cum = cumulative_at(grid, &times, exec, |t, y| env.mean(t, y).unwrap_or(f64::NAN));
    table_from(cum, &times)
}

/// `gap_t(x)` for grid arm `x`.
pub fn adversarial_gap(env: &Environment, grid: &[Arm], t: usize, x: usize) -> f64 {
    gap_table(env, grid, &[t], Exec::Sequential).gaps[0][x]
}

/// `gapIID(x) = max_y mu(y) - mu(x)` on the grid.
pub fn gap_iid(env: &Environment, grid: &[Arm]) -> Vec<f64> {
    let mu: Vec<f64> = grid.iter().map(|y| env.mean(1, y).unwrap_or(f64::NAN)).collect();
    let best = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    mu.iter().map(|m| best - m).collect()
}

/// Default leading constant of the eps-optimality threshold.
pub const EPS_OPTIMAL_MULTIPLIER: f64 = 30.0;

/// `multiplier * eps * ln T * sqrt(d ln(N T))`.
pub fn eps_optimal_threshold(eps: f64, d: f64, n_dbl: f64, horizon: usize, multiplier: f64) -> f64 {
    let big_t = horizon as f64;
    multiplier * eps * big_t.ln() * (d * (n_dbl * big_t).ln()).sqrt()
}

/// End-times `t0 * 2^k` within `[1, T]`, `t0` the smallest integer above
/// `eps^-2 / 9`.
pub fn end_time_ladder(eps: f64, horizon: usize) -> Vec<usize> {
    let t0 = (eps.powi(-2) / 9.0).floor() as usize + 1;
    let mut out = Vec::new();
    let mut t = t0;
    while t <= horizon {
        out.push(t);
        t *= 2;
    }
    out
}

/// Grid indices whose gap drops below `threshold` at some ladder time
/// present in `table`.
pub fn eps_optimal_from_table(table: &GapTable, ladder: &[usize], threshold: f64) -> Vec<usize> {
    let rows: Vec<&Vec<f64>> =
        table.times.iter().zip(&table.gaps).filter(|(t, _)| ladder.contains(t)).map(|(_, g)| g).collect();
    let n = table.gaps.first().map_or(0, Vec::len);
    (0..n).filter(|&i| rows.iter().any(|g| g[i] < threshold)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsOptimalParams {
    pub d: f64,
    pub n_dbl: f64,
    pub horizon: usize,
    pub multiplier: f64,
}

/// Inclusively eps-optimal grid arms under realized gaps.
pub fn eps_optimal_set(
    env: &Environment,
    grid: &[Arm],
    eps: f64,
    p: EpsOptimalParams,
    exec: Exec,
) -> Vec<usize> {
    let ladder = end_time_ladder(eps, p.horizon.min(env.horizon));
    if ladder.is_empty() {
        return Vec::new();
    }
    let table = gap_table(env, grid, &ladder, exec);
    let threshold = eps_optimal_threshold(eps, p.d, p.n_dbl, p.horizon, p.multiplier);
    eps_optimal_from_table(&table, &ladder, threshold)
}
