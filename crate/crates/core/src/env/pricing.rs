//! Posted-price environments: a buyer with private value `v_t` buys iff
//! the price is at most `v_t`, and the reward is the price on a sale.

use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::rng::KeyedHash;

/// Distribution of private values, described by `F(x) = P(v < x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueDistribution {
    Uniform {
        low: f64,
        high: f64,
    },
    /// `F(x) = 1 - a/x + |x - b|/x` on `[low, high]`, with the mass
    /// `F(low)` placed at value 0 and `1 - F(high)` at value 1. On the part
    /// of the support where this is a CDF the mean revenue is
    /// `a - |x - b|`.
    Target {
        a: f64,
        b: f64,
        low: f64,
        high: f64,
    },
}

const MONOTONE_CHECK_POINTS: usize = 4097;

impl ValueDistribution {
    /// `F(x) = P(v < x)` on the whole line.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            ValueDistribution::Uniform { low, high } => {
                if x <= low {
                    0.0
                } else if x >= high {
                    1.0
                } else {
                    (x - low) / (high - low)
                }
            }
            ValueDistribution::Target { a, b, low, high } => {
                if x <= 0.0 {
                    0.0
                } else if x > 1.0 {
                    1.0
                } else {
                    target_formula(a, b, x.clamp(low, high))
                }
            }
        }
    }

    /// Expected revenue of posting price `x`.
    pub fn mean_revenue(&self, x: f64) -> f64 {
        x * (1.0 - self.cdf(x))
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        match *self {
            ValueDistribution::Uniform { low, high } => {
                if !(0.0 <= low && low < high && high <= 1.0) {
                    return Err(EnvError::Invalid(format!(
                        "uniform values need 0 <= low < high <= 1, got [{low}, {high}]"
                    )));
                }
            }
            ValueDistribution::Target { a, b, low, high } => {
                if !(0.0 < low && low < high && high <= 1.0) {
                    return Err(EnvError::Invalid(format!(
                        "target support must satisfy 0 < low < high <= 1, got [{low}, {high}]"
                    )));
                }
                let f_low = target_formula(a, b, low);
                let f_high = target_formula(a, b, high);
                if f_low < 0.0 || f_high > 1.0 {
                    return Err(EnvError::NonMonotoneCdf(format!(
                        "F(low) = {f_low}, F(high) = {f_high} must lie in [0, 1]"
                    )));
                }
                let mut prev = f_low;
                for i in 1..MONOTONE_CHECK_POINTS {
                    let x = low + (high - low) * i as f64 / (MONOTONE_CHECK_POINTS - 1) as f64;
                    let f = target_formula(a, b, x);
                    if f < prev - 1e-12 {
                        return Err(EnvError::NonMonotoneCdf(format!(
                            "F decreases near x = {x:.4} (a = {a}, b = {b}, support [{low}, {high}])"
                        )));
                    }
                    prev = f;
                }
            }
        }
        Ok(())
    }

    /// Inverse-CDF sample from a uniform draw `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> f64 {
        match *self {
            ValueDistribution::Uniform { low, high } => low + u * (high - low),
            ValueDistribution::Target { a, b, low, high } => {
                let f_low = target_formula(a, b, low);
                let f_high = target_formula(a, b, high);
                if u < f_low {
                    return 0.0;
                }
                if u >= f_high {
                    return 1.0;
                }
                // smallest v with F(v) > u, by bisection
                let (mut lo, mut hi) = (low, high);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if target_formula(a, b, mid) > u {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        }
    }
}

fn target_formula(a: f64, b: f64, x: f64) -> f64 {
    1.0 - a / x + (x - b).abs() / x
}

/// Inverse-CDF sample for a value distribution; rejects parameters that do
/// not describe a monotone CDF.
pub fn pricing_value_from_cdf(dist: &ValueDistribution, u: f64) -> Result<f64, EnvError> {
    dist.validate()?;
    Ok(dist.sample(u))
}

/// Buyer values for every round, drawn before round 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingInstance {
    pub distributions: Vec<ValueDistribution>,
    /// Distribution index per round.
    pub schedule: Vec<u32>,
    pub values: Vec<f64>,
}

impl PricingInstance {
    pub fn new(
        distributions: Vec<ValueDistribution>,
        schedule: Vec<u32>,
        seed: u64,
    ) -> Result<Self, EnvError> {
        for d in &distributions {
            d.validate()?;
        }
        let values = schedule
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let u = KeyedHash::new(seed).push(0x0070_7269_6365).push(i as u64 + 1).uniform();
                distributions[k as usize].sample(u)
            })
            .collect();
        Ok(PricingInstance { distributions, schedule, values })
    }

    /// Fixed values; the mean revenue is that of a point mass at each value.
    pub fn from_values(values: Vec<f64>) -> Self {
        let distributions = values.iter().map(|&v| ValueDistribution::Uniform { low: v, high: v }).collect();
        let schedule = (0..values.len() as u32).collect();
        PricingInstance { distributions, schedule, values }
    }
}

/// Reward of posting price `x` to a buyer with value `v`.
#[inline]
pub fn posted_price_reward(x: f64, v: f64) -> f64 {
    if x <= v {
        x
    } else {
        0.0
    }
}
