//! Combined adversarial instances: several stochastic instances with
//! disjoint peak regions, interleaved by a fixed schedule.

use serde::{Deserialize, Serialize};

use super::{probe_points, EnvError, StochasticInstance};
use crate::env::mean::Support;
use crate::metric::ActionSpace;

/// Which instance is in force at each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Schedule {
    /// `(instance, length)` phases whose lengths sum to the horizon.
    Phases { phases: Vec<(usize, usize)> },
    /// `(instance, fraction)` phases scaled to the horizon; the last phase
    /// absorbs rounding.
    Fractions { phases: Vec<(usize, f64)> },
    /// Instance index for every round.
    Explicit { rounds: Vec<usize> },
    /// A pattern repeated until the horizon.
    Cycle { pattern: Vec<usize> },
}

impl Schedule {
    pub fn single() -> Self {
        Schedule::Cycle { pattern: vec![0] }
    }

    pub fn materialize(&self, horizon: usize, m: usize) -> Result<Vec<u32>, EnvError> {
        let out: Vec<usize> = match self {
            Schedule::Phases { phases } => {
                phases.iter().flat_map(|&(i, len)| std::iter::repeat_n(i, len)).collect()
            }
            Schedule::Fractions { phases } => {
                let mut out = Vec::with_capacity(horizon);
                for (k, &(i, f)) in phases.iter().enumerate() {
                    let len = if k + 1 == phases.len() {
                        horizon.saturating_sub(out.len())
                    } else {
                        (f * horizon as f64).round() as usize
                    };
                    out.extend(std::iter::repeat_n(i, len));
                }
                out
            }
            Schedule::Explicit { rounds } => rounds.clone(),
            Schedule::Cycle { pattern } => {
                if pattern.is_empty() {
                    return Err(EnvError::Invalid("empty schedule pattern".into()));
                }
                pattern.iter().copied().cycle().take(horizon).collect()
            }
        };
        if out.len() != horizon {
            return Err(EnvError::Assumption {
                assumption: "schedule total on [T]",
                detail: format!("schedule covers {} rounds, horizon is {horizon}", out.len()),
            });
        }
        if let Some(&bad) = out.iter().find(|&&i| i >= m) {
            return Err(EnvError::Invalid(format!("schedule names instance {bad}, only {m} exist")));
        }
        Ok(out.into_iter().map(|i| i as u32).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedInstance {
    pub instances: Vec<StochasticInstance>,
    pub schedule: Vec<u32>,
    pub subsets: Vec<Support>,
    pub baselines: Vec<f64>,
}

const SPREAD: f64 = 1.0 / 3.0;
const TOL: f64 = 1e-9;

/// Validate and assemble a combined instance. Each failure names the
/// violated assumption.
pub fn make_combined(
    space: &ActionSpace,
    instances: Vec<StochasticInstance>,
    schedule: Vec<u32>,
    subsets: Vec<Support>,
    baselines: Vec<f64>,
) -> Result<CombinedInstance, EnvError> {
    let m = instances.len();
    if m == 0 || subsets.len() != m || baselines.len() != m {
        return Err(EnvError::Invalid(format!(
            "{m} instances, {} subsets and {} baselines must match and be non-empty",
            subsets.len(),
            baselines.len()
        )));
    }
    let instances = instances
        .into_iter()
        .map(|s| Ok(StochasticInstance { mean: s.mean.resolve(space)?, noise: s.noise }))
        .collect::<Result<Vec<_>, EnvError>>()?;
    for i in 0..m {
        for j in i + 1..m {
            if subsets[i].overlaps(&subsets[j]) {
                return Err(EnvError::Assumption {
                    assumption: "subsets pairwise disjoint",
                    detail: format!("S_{} and S_{} overlap", i + 1, j + 1),
                });
            }
        }
    }
    if let Some(&bad) = schedule.iter().find(|&&i| i as usize >= m) {
        return Err(EnvError::Invalid(format!("schedule names instance {bad}, only {m} exist")));
    }
    let probes = probe_points(space);
    for (i, inst) in instances.iter().enumerate() {
        let b = baselines[i];
        let mut peak = f64::NEG_INFINITY;
        for x in &probes {
            let mu = inst.mean.mean(space, x);
            if !(0.0..=1.0).contains(&mu) {
                return Err(EnvError::Invalid(format!("instance {} has mean {mu} at {x}", i + 1)));
            }
            let home = subsets.iter().position(|s| s.contains(x));
            match home {
                Some(j) if j == i => {
                    if mu < b - TOL {
                        return Err(EnvError::Assumption {
                            assumption: "mean >= baseline inside own subset",
                            detail: format!("instance {} has {mu} < {b} at {x}", i + 1),
                        });
                    }
                    peak = peak.max(mu);
                }
                Some(j) => {
                    if (mu - b).abs() > TOL {
                        return Err(EnvError::Assumption {
                            assumption: "mean = baseline on other subsets",
                            detail: format!("instance {} has {mu} != {b} at {x} in S_{}", i + 1, j + 1),
                        });
                    }
                }
                None => {
                    if mu > b + TOL {
                        return Err(EnvError::Assumption {
                            assumption: "mean <= baseline outside all subsets",
                            detail: format!("instance {} has {mu} > {b} at {x}", i + 1),
                        });
                    }
                }
            }
        }
        if peak - b < SPREAD - TOL {
            return Err(EnvError::Assumption {
                assumption: "spread >= 1/3",
                detail: format!("instance {} has spread {:.4}", i + 1, peak - b),
            });
        }
    }
    Ok(CombinedInstance { instances, schedule, subsets, baselines })
}

impl CombinedInstance {
    /// Fraction of rounds `1..=t` assigned to each instance.
    pub fn frequencies(&self, t: usize) -> Vec<f64> {
        let mut f = vec![0.0; self.instances.len()];
        for &i in &self.schedule[..t] {
            f[i as usize] += 1.0;
        }
        f.iter_mut().for_each(|v| *v /= t as f64);
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, MeanFunction, NoiseModel, Preset};
    use crate::metric::Arm;

    fn line() -> ActionSpace {
        ActionSpace::cube(1).unwrap()
    }

    fn peaked(target: f64, peak: f64, low: f64, high: f64, b: f64) -> StochasticInstance {
        StochasticInstance {
            mean: MeanFunction::DistanceToTarget {
                target: Arm::scalar(target),
                peak,
                floor: b,
                support: Support::Interval { low, high },
                baseline: b,
            },
            noise: NoiseModel::Bernoulli,
        }
    }

    fn halves() -> Vec<Support> {
        vec![Support::Interval { low: 0.0, high: 0.5 }, Support::Interval { low: 0.5, high: 1.0 }]
    }

    #[test]
    fn single_instance_matches_stochastic() {
        let inst = peaked(0.3, 0.8, 0.0, 1.0, 0.2);
        let c =
            make_combined(&line(), vec![inst.clone()], vec![0; 50], vec![Support::All], vec![0.2]).unwrap();
        let a = Environment::combined(line(), 4, c);
        let b = Environment::stochastic(line(), 50, 4, inst).unwrap();
        for t in 1..=50 {
            let x = Arm::scalar(t as f64 / 50.0);
            assert_eq!(a.eval_reward(t, &x).unwrap(), b.eval_reward(t, &x).unwrap());
        }
    }

    #[test]
    fn small_spread_is_rejected_by_name() {
        let err = make_combined(
            &line(),
            vec![peaked(0.1, 0.6, 0.0, 0.5, 0.4), peaked(0.9, 0.6, 0.5, 1.0, 0.4)],
            vec![0, 1],
            halves(),
            vec![0.4, 0.4],
        )
        .unwrap_err();
        assert!(err.to_string().contains("spread >= 1/3"), "{err}");
    }

    #[test]
    fn overlapping_subsets_are_rejected() {
        let err = make_combined(
            &line(),
            vec![peaked(0.1, 0.8, 0.0, 0.6, 0.4), peaked(0.9, 0.8, 0.5, 1.0, 0.4)],
            vec![0, 1],
            vec![Support::Interval { low: 0.0, high: 0.6 }, Support::Interval { low: 0.5, high: 1.0 }],
            vec![0.4, 0.4],
        )
        .unwrap_err();
        assert!(err.to_string().contains("disjoint"), "{err}");
    }

    #[test]
    fn baseline_on_other_subset_is_enforced() {
        // instance 1 leaks above its baseline into S_2
        let leaky = StochasticInstance {
            mean: MeanFunction::DistanceToTarget {
                target: Arm::scalar(0.3),
                peak: 0.8,
                floor: 0.4,
                support: Support::All,
                baseline: 0.4,
            },
            noise: NoiseModel::Bernoulli,
        };
        let err = make_combined(
            &line(),
            vec![leaky, peaked(0.9, 0.8, 0.5, 1.0, 0.4)],
            vec![0, 1],
            halves(),
            vec![0.4, 0.4],
        )
        .unwrap_err();
        assert!(err.to_string().contains("other subsets"), "{err}");
    }

    #[test]
    fn mixture_identity_with_half_phases() {
        let t_max = 400;
        let env = Preset::Combined2.spec().build(&line(), t_max, 1).unwrap();
        let crate::env::EnvKind::Combined(c) = &env.kind else { unreachable!() };
        let f = c.frequencies(t_max);
        assert_eq!(f, vec![0.5, 0.5]);
        let x = Arm::scalar(0.2);
        let mu1 = c.instances[0].mean.mean(&env.space, &x);
        let want = f[0] * mu1 + f[1] * c.baselines[1];
        assert!((env.average_mean(t_max, &x).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn schedules_materialize() {
        let s = Schedule::Phases { phases: vec![(0, 2), (1, 3)] };
        assert_eq!(s.materialize(5, 2).unwrap(), vec![0, 0, 1, 1, 1]);
        assert!(s.materialize(6, 2).is_err());
        let c = Schedule::Cycle { pattern: vec![1, 0] };
        assert_eq!(c.materialize(3, 2).unwrap(), vec![1, 0, 1]);
        let f = Schedule::Fractions { phases: vec![(0, 0.5), (1, 0.5)] };
        assert_eq!(f.materialize(5, 2).unwrap(), vec![0, 0, 0, 1, 1]);
        assert!(Schedule::Explicit { rounds: vec![0, 2] }.materialize(2, 2).is_err());
    }
}
