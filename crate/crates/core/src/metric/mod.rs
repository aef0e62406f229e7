//! Action-space geometry: the dyadic cube tree, finite metric spaces with
//! their zooming DAG, and covering utilities.

pub mod cube;
pub mod dag;
pub mod finite;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cube::{cube_children, cube_root, representative, sup_distance, CubeNode, RepresentativePolicy};
pub use dag::{build_zooming_dag, DagNode, DagNodeId, DagViolation, ZoomingDag};
pub use finite::{
    doubling_constant, greedy_cover, greedy_cover_by, min_clique_partition, DoublingReport, FiniteMetricSpace,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("empty space")]
    EmptySpace,
    #[error("eps must be positive, got {0}")]
    NonPositiveEps(f64),
    #[error("row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("distance ({i},{j}) = {value} is not a finite non-negative number")]
    InvalidDistance { i: usize, j: usize, value: f64 },
    #[error("dist({i},{i}) = {value}, expected 0")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("dist({i},{j}) != dist({j},{i})")]
    Asymmetric { i: usize, j: usize },
    #[error("triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("diameter {0} exceeds 1")]
    DiameterTooLarge(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o: {0}")]
    Io(String),
}

/// A point of the action space: coordinates in `[0,1]^d`, or the index of
/// a point in a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Point(Vec<f64>),
    Index(usize),
}

impl Arm {
    pub fn scalar(x: f64) -> Self {
        Arm::Point(vec![x])
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Arm::Point(c) => Some(c),
            Arm::Index(_) => None,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Arm::Index(i) => Some(*i),
            Arm::Point(_) => None,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arm::Point(c) => {
                for (k, x) in c.iter().enumerate() {
                    if k > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Arm::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// A finite space together with its covering dimension and doubling
/// constant, shared read-only between runs.
#[derive(Debug, Clone)]
pub struct FiniteSpace {
    pub metric: FiniteMetricSpace,
    pub covering_dim: f64,
    pub doubling: usize,
}

impl FiniteSpace {
    /// Computes the doubling constant (greedy upper bound for large balls).
    pub fn new(metric: FiniteMetricSpace, covering_dim: f64) -> Self {
        let doubling = doubling_constant(&metric).value.max(2);
        FiniteSpace { metric, covering_dim, doubling }
    }
}

#[derive(Debug, Clone)]
pub enum ActionSpace {
    Cube { d: usize },
    Finite(Arc<FiniteSpace>),
}

impl ActionSpace {
    pub fn cube(d: usize) -> Result<Self, MetricError> {
        if d == 0 {
            return Err(MetricError::ZeroDimension);
        }
        Ok(ActionSpace::Cube { d })
    }

    pub fn finite(metric: FiniteMetricSpace, covering_dim: f64) -> Self {
        ActionSpace::Finite(Arc::new(FiniteSpace::new(metric, covering_dim)))
    }

    /// Covering dimension `d` used by the parameter tuning.
    pub fn covering_dim(&self) -> f64 {
        match self {
            ActionSpace::Cube { d } => *d as f64,
            ActionSpace::Finite(f) => f.covering_dim,
        }
    }

    /// `2^d` for cubes.
    pub fn doubling_constant(&self) -> usize {
        match self {
            ActionSpace::Cube { d } => 1 << d,
            ActionSpace::Finite(f) => f.doubling,
        }
    }

    pub fn contains(&self, arm: &Arm) -> bool {
        match (self, arm) {
            (ActionSpace::Cube { d }, Arm::Point(x)) => {
                x.len() == *d && x.iter().all(|v| (0.0..=1.0).contains(v))
            }
            (ActionSpace::Finite(f), Arm::Index(i)) => *i < f.metric.len(),
            _ => false,
        }
    }

    pub fn distance(&self, a: &Arm, b: &Arm) -> f64 {
        match (self, a, b) {
            (ActionSpace::Finite(f), Arm::Index(i), Arm::Index(j)) => f.metric.d(*i, *j),
            (_, Arm::Point(x), Arm::Point(y)) => sup_distance(x, y),
            _ => f64::INFINITY,
        }
    }

    /// Evaluation grid: cell centers at resolution `eps` per axis for cubes,
    /// every point for finite spaces.
    pub fn grid(&self, eps: f64) -> Vec<Arm> {
        match self {
            ActionSpace::Cube { d } => {
                crate::baselines::uniform_grid(*d, eps).into_iter().map(Arm::Point).collect()
            }
            ActionSpace::Finite(f) => (0..f.metric.len()).map(Arm::Index).collect(),
        }
    }
}
