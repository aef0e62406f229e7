//! Empirical check of the Lipschitz condition on expected rewards.

use serde::Serialize;

use super::Environment;
use crate::metric::{ActionSpace, Arm};
use crate::parallel::Exec;
use crate::rng::{derive_seed, KeyedHash};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditFlag {
    pub t: usize,
    pub x: Arm,
    pub y: Arm,
    pub estimate: f64,
    pub std_err: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub pairs: usize,
    pub replicas: usize,
    /// True when only the one-sided pricing condition was checked.
    pub one_sided: bool,
    pub flags: Vec<AuditFlag>,
}

pub const DEFAULT_REPLICAS: usize = 400;

fn random_arm(space: &ActionSpace, h: KeyedHash) -> Arm {
    match space {
        ActionSpace::Cube { d } => Arm::Point((0..*d).map(|k| h.push(k as u64).uniform()).collect()),
        ActionSpace::Finite(f) => Arm::Index((h.uniform() * f.metric.len() as f64) as usize % f.metric.len()),
    }
}

/// Samples `pairs` triples `(t, x, y)` and estimates `E[g_t(x) - g_t(y)]`
/// from `replicas` independent noise seeds; flags estimates above
/// `D(x, y) + 3 se`. Pricing rewards are checked per realization against
/// `g_t(x) - g_t(y) <= x - y` for `x > y` instead.
pub fn lipschitz_audit(
    env: &Environment,
    pairs: usize,
    replicas: usize,
    seed: u64,
    exec: Exec,
) -> AuditReport {
    let one_sided = env.is_pricing();
    let flags: Vec<Option<AuditFlag>> = exec.map_range(pairs, |i| {
        let h = KeyedHash::new(seed).push(i as u64);
        let t = 1 + (h.push(0).uniform() * env.horizon as f64) as usize;
        let t = t.min(env.horizon);
        let x = random_arm(&env.space, h.push(1));
        let y = random_arm(&env.space, h.push(2));
        let distance = env.space.distance(&x, &y);
        if one_sided {
            let (hi, lo) = if x.coords().unwrap()[0] >= y.coords().unwrap()[0] { (x, y) } else { (y, x) };
            let diff = env.reward_unchecked(env.seed, t, &hi) - env.reward_unchecked(env.seed, t, &lo);
            let gap = hi.coords().unwrap()[0] - lo.coords().unwrap()[0];
            return (diff > gap + 1e-12).then_some(AuditFlag {
                t,
                x: hi,
                y: lo,
                estimate: diff,
                std_err: 0.0,
                distance,
            });
        }
        let r = replicas.max(2);
        let diffs: Vec<f64> = (0..r)
            .map(|k| {
                let s = derive_seed(env.seed, 1 + k as u64);
                env.reward_unchecked(s, t, &x) - env.reward_unchecked(s, t, &y)
            })
            .collect();
        let mean = diffs.iter().sum::<f64>() / r as f64;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
        let std_err = (var / r as f64).sqrt();
        (mean > distance + 3.0 * std_err).then_some(AuditFlag { t, x, y, estimate: mean, std_err, distance })
    });
    AuditReport {
        pairs,
        replicas: if one_sided { 1 } else { replicas.max(2) },
        one_sided,
        flags: flags.into_iter().flatten().collect(),
    }
}
