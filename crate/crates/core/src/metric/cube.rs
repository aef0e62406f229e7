//! Dyadic cube tree over `[0,1]^d` with the sup-norm metric.

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::rng::KeyedHash;

/// An axis-parallel cube of side `2^-height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeNode {
    pub center: Vec<f64>,
    pub half_width: f64,
    pub height: u32,
    /// Which quadrant of the parent this is; bit `k` set means the upper
    /// half along axis `k`. Zero for the root.
    pub quadrant_index: usize,
}

impl CubeNode {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Diameter under the sup norm, equal to the side length.
    pub fn diameter(&self) -> f64 {
        self.side()
    }

    pub fn low(&self) -> Vec<f64> {
        self.center.iter().map(|c| c - self.half_width).collect()
    }

    pub fn high(&self) -> Vec<f64> {
        self.center.iter().map(|c| c + self.half_width).collect()
    }

    /// Closed-region membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.center).all(|(xi, ci)| (xi - ci).abs() <= self.half_width)
    }
}

/// Rule for picking the arm played when a node is selected. Fixed before
/// round 1 and never depends on observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum RepresentativePolicy {
    #[default]
    Center,
    /// Lowest corner of the cube; for prices this is the lowest price in
    /// the interval.
    LowEndpoint,
    /// A uniform point of the cube keyed by `(seed, height, center)`.
    SeededUniform { seed: u64 },
}

pub fn cube_root(d: usize) -> Result<CubeNode, MetricError> {
    if d == 0 {
        return Err(MetricError::ZeroDimension);
    }
    Ok(CubeNode { center: vec![0.5; d], half_width: 0.5, height: 0, quadrant_index: 0 })
}

/// The `2^d` quadrants of `u`, in quadrant-index order.
pub fn cube_children(u: &CubeNode) -> Vec<CubeNode> {
    let d = u.dim();
    let quarter = u.half_width / 2.0;
    (0..1usize << d)
        .map(|q| CubeNode {
            center: u
                .center
                .iter()
                .enumerate()
                .map(|(k, c)| if q >> k & 1 == 1 { c + quarter } else { c - quarter })
                .collect(),
            half_width: quarter,
            height: u.height + 1,
            quadrant_index: q,
        })
        .collect()
}

/// The arm played whenever node `u` is selected.
pub fn representative(u: &CubeNode, policy: RepresentativePolicy) -> Vec<f64> {
    match policy {
        RepresentativePolicy::Center => u.center.clone(),
        RepresentativePolicy::LowEndpoint => u.low(),
        RepresentativePolicy::SeededUniform { seed } => {
            let key =
                u.center.iter().fold(KeyedHash::new(seed).push(u.height as u64), |h, &c| h.push_coord(c));
            u.center
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let v = key.push(k as u64).uniform();
                    (c - u.half_width + v * u.side()).clamp(c - u.half_width, c + u.half_width)
                })
                .collect()
        }
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
