//! Oblivious reward generators.
//!
//! Every reward is a pure function of `(seed, t, arm)`: noise comes from a
//! counter-based hash keyed by the round and the arm quantized to `2^-40`,
//! so replaying any round in any order gives the same value.

pub mod audit;
pub mod combined;
pub mod mean;
pub mod pricing;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{ActionSpace, Arm};
use crate::rng::{normal_from, KeyedHash};

pub use audit::{lipschitz_audit, AuditFlag, AuditReport, DEFAULT_REPLICAS};
pub use combined::{make_combined, CombinedInstance, Schedule};
pub use mean::{load_table, MeanFunction, Support};
pub use pricing::{posted_price_reward, pricing_value_from_cdf, PricingInstance, ValueDistribution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("round {t} outside 1..={horizon}")]
    RoundOutOfRange { t: usize, horizon: usize },
    #[error("arm {0} is outside the action space")]
    ArmOutOfRange(String),
    #[error("{0}")]
    Invalid(String),
    #[error("assumption violated ({assumption}): {detail}")]
    Assumption { assumption: &'static str, detail: String },
    #[error("value distribution is not a CDF: {0}")]
    NonMonotoneCdf(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    Bernoulli,
    /// `mu + sigma * N(0,1)`, redrawn until it lands in `[0,1]`; clipped
    /// after a bounded number of attempts.
    Gaussian {
        sigma: f64,
    },
    None,
}

const GAUSSIAN_ATTEMPTS: u64 = 32;

impl NoiseModel {
    pub fn realize(&self, mu: f64, key: KeyedHash) -> f64 {
        match *self {
            NoiseModel::Bernoulli => {
                if key.uniform() < mu {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseModel::Gaussian { sigma } => {
                for k in 0..GAUSSIAN_ATTEMPTS {
                    let r = mu + sigma * normal_from(key.push(k));
                    if (0.0..=1.0).contains(&r) {
                        return r;
                    }
                }
                mu.clamp(0.0, 1.0)
            }
            NoiseModel::None => mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticInstance {
    pub mean: MeanFunction,
    #[serde(default)]
    pub noise: NoiseModel,
}

#[derive(Debug, Clone)]
pub enum EnvKind {
    Stochastic(StochasticInstance),
    Combined(CombinedInstance),
    Pricing(PricingInstance),
}

/// A fully materialized oblivious adversary for one horizon and seed.
#[derive(Debug, Clone)]
pub struct Environment {
    pub space: ActionSpace,
    pub horizon: usize,
    pub seed: u64,
    pub kind: EnvKind,
}

fn noise_key(seed: u64, t: usize, arm: &Arm) -> KeyedHash {
    let h = KeyedHash::new(seed).push(t as u64);
    match arm {
        Arm::Point(x) => x.iter().fold(h, |h, &v| h.push_coord(v)),
        Arm::Index(i) => h.push(u64::MAX).push(*i as u64),
    }
}

impl Environment {
    pub fn stochastic(
        space: ActionSpace,
        horizon: usize,
        seed: u64,
        inst: StochasticInstance,
    ) -> Result<Self, EnvError> {
        let inst = StochasticInstance { mean: inst.mean.resolve(&space)?, noise: inst.noise };
        check_mean_range(&space, &inst.mean)?;
        Ok(Environment { space, horizon, seed, kind: EnvKind::Stochastic(inst) })
    }

    pub fn combined(space: ActionSpace, seed: u64, inst: CombinedInstance) -> Self {
        Environment { horizon: inst.schedule.len(), space, seed, kind: EnvKind::Combined(inst) }
    }

    pub fn pricing(space: ActionSpace, seed: u64, inst: PricingInstance) -> Self {
        Environment { horizon: inst.values.len(), space, seed, kind: EnvKind::Pricing(inst) }
    }

    fn check(&self, t: usize, arm: &Arm) -> Result<(), EnvError> {
        if t == 0 || t > self.horizon {
            return Err(EnvError::RoundOutOfRange { t, horizon: self.horizon });
        }
        if !self.space.contains(arm) {
            return Err(EnvError::ArmOutOfRange(arm.to_string()));
        }
        Ok(())
    }

    /// `g_t(x)`.
    pub fn eval_reward(&self, t: usize, arm: &Arm) -> Result<f64, EnvError> {
        self.check(t, arm)?;
        Ok(self.reward_unchecked(self.seed, t, arm))
    }

    /// Reward under a different noise seed. Pricing values are fixed at
    /// construction and ignore `seed`.
    pub(crate) fn reward_unchecked(&self, seed: u64, t: usize, arm: &Arm) -> f64 {
        match &self.kind {
            EnvKind::Stochastic(s) => {
                let mu = s.mean.mean(&self.space, arm);
                s.noise.realize(mu, noise_key(seed, t, arm))
            }
            EnvKind::Combined(c) => {
                let inst = &c.instances[c.schedule[t - 1] as usize];
                let mu = inst.mean.mean(&self.space, arm);
                inst.noise.realize(mu, noise_key(seed, t, arm))
            }
            EnvKind::Pricing(p) => {
                let x = arm.coords().map_or(0.0, |c| c[0]);
                posted_price_reward(x, p.values[t - 1])
            }
        }
    }

    /// `E[g_t(x)]`.
    pub fn mean(&self, t: usize, arm: &Arm) -> Result<f64, EnvError> {
        self.check(t, arm)?;
        Ok(match &self.kind {
            EnvKind::Stochastic(s) => s.mean.mean(&self.space, arm),
            EnvKind::Combined(c) => c.instances[c.schedule[t - 1] as usize].mean.mean(&self.space, arm),
            EnvKind::Pricing(p) => {
                let x = arm.coords().map_or(0.0, |c| c[0]);
                p.distributions[p.schedule[t - 1] as usize].mean_revenue(x)
            }
        })
    }

    /// `(1/t) sum_{tau <= t} E[g_tau(x)]`: the time-averaged mean, which for a
    /// stochastic instance is just `mu(x)`.
    pub fn average_mean(&self, t: usize, arm: &Arm) -> Result<f64, EnvError> {
        match &self.kind {
            EnvKind::Stochastic(_) => self.mean(t, arm),
            _ => {
                let mut s = 0.0;
                for tau in 1..=t {
                    s += self.mean(tau, arm)?;
                }
                Ok(s / t as f64)
            }
        }
    }

    pub fn is_pricing(&self) -> bool {
        matches!(self.kind, EnvKind::Pricing(_))
    }
}

/// Points on which means are validated: a fine grid for cubes, every point
/// of a finite space.
pub(crate) fn probe_points(space: &ActionSpace) -> Vec<Arm> {
    match space {
        ActionSpace::Cube { d } => {
            let per_axis = match d {
                1 => 4097,
                2 => 129,
                3 => 33,
                _ => 9,
            };
            let mut out = Vec::new();
            let mut idx = vec![0usize; *d];
            loop {
                out.push(Arm::Point(idx.iter().map(|&i| i as f64 / (per_axis - 1) as f64).collect()));
                let mut k = 0;
                while k < *d {
                    idx[k] += 1;
                    if idx[k] < per_axis {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == *d {
                    return out;
                }
            }
        }
        ActionSpace::Finite(_) => space.grid(1.0),
    }
}

fn check_mean_range(space: &ActionSpace, mean: &MeanFunction) -> Result<(), EnvError> {
    for x in probe_points(space) {
        let mu = mean.mean(space, &x);
        if !(0.0..=1.0).contains(&mu) {
            return Err(EnvError::Invalid(format!("mean {mu} at {x} is outside [0, 1]")));
        }
    }
    Ok(())
}

/// Declarative environment description, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    Stochastic {
        mean: MeanFunction,
        #[serde(default)]
        noise: NoiseModel,
    },
    Combined {
        instances: Vec<StochasticInstance>,
        schedule: Schedule,
        subsets: Vec<Support>,
        baselines: Vec<f64>,
    },
    Pricing {
        distributions: Vec<ValueDistribution>,
        #[serde(default = "Schedule::single")]
        schedule: Schedule,
    },
    Preset {
        name: Preset,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Peak 0.9 at 0.3, slope one everywhere.
    DistanceToTarget,
    /// `1/4 + x (1 - x)` in every coordinate.
    Concave,
    /// Two distance-to-target instances peaked at 0.1 and 0.9 with
    /// baseline 0.4, each in force for half the horizon.
    Combined2,
    /// Values uniform on `[0, 1]`.
    PricingUniform,
}

impl Preset {
    pub fn spec(self) -> EnvSpec {
        match self {
            Preset::DistanceToTarget => EnvSpec::Stochastic {
                mean: MeanFunction::DistanceToTarget {
                    target: Arm::scalar(0.3),
                    peak: 0.9,
                    floor: 0.0,
                    support: Support::All,
                    baseline: 0.0,
                },
                noise: NoiseModel::Bernoulli,
            },
            Preset::Concave => EnvSpec::Stochastic {
                mean: MeanFunction::Concave { low: 0.0, high: 1.0, baseline: 0.25, height: 0.25 },
                noise: NoiseModel::Bernoulli,
            },
            Preset::Combined2 => {
                let peak = |target: f64, low: f64, high: f64| StochasticInstance {
                    mean: MeanFunction::DistanceToTarget {
                        target: Arm::scalar(target),
                        peak: 0.75,
                        floor: 0.4,
                        support: Support::Interval { low, high },
                        baseline: 0.4,
                    },
                    noise: NoiseModel::Bernoulli,
                };
                EnvSpec::Combined {
                    instances: vec![peak(0.1, 0.0, 0.5), peak(0.9, 0.5, 1.0)],
                    schedule: Schedule::Fractions { phases: vec![(0, 0.5), (1, 0.5)] },
                    subsets: vec![
                        Support::Interval { low: 0.0, high: 0.5 },
                        Support::Interval { low: 0.5, high: 1.0 },
                    ],
                    baselines: vec![0.4, 0.4],
                }
            }
            Preset::PricingUniform => EnvSpec::Pricing {
                distributions: vec![ValueDistribution::Uniform { low: 0.0, high: 1.0 }],
                schedule: Schedule::single(),
            },
        }
    }
}

impl EnvSpec {
    pub fn build(&self, space: &ActionSpace, horizon: usize, seed: u64) -> Result<Environment, EnvError> {
        match self {
            EnvSpec::Stochastic { mean, noise } => Environment::stochastic(
                space.clone(),
                horizon,
                seed,
                StochasticInstance { mean: mean.clone(), noise: *noise },
            ),
            EnvSpec::Combined { instances, schedule, subsets, baselines } => {
                let inst = make_combined(
                    space,
                    instances.clone(),
                    schedule.materialize(horizon, instances.len())?,
                    subsets.clone(),
                    baselines.clone(),
                )?;
                Ok(Environment::combined(space.clone(), seed, inst))
            }
            EnvSpec::Pricing { distributions, schedule } => {
                if !matches!(space, ActionSpace::Cube { d: 1 }) {
                    return Err(EnvError::Invalid("pricing needs the price interval [0, 1]".into()));
                }
                let sched = schedule.materialize(horizon, distributions.len())?;
                let inst = PricingInstance::new(distributions.clone(), sched, seed)?;
                Ok(Environment::pricing(space.clone(), seed, inst))
            }
            EnvSpec::Preset { name } => name.spec().build(space, horizon, seed),
        }
    }

    /// Whether rewards satisfy only the one-sided condition.
    pub fn is_pricing(&self) -> bool {
        match self {
            EnvSpec::Pricing { .. } => true,
            EnvSpec::Preset { name } => *name == Preset::PricingUniform,
            _ => false,
        }
    }
}
