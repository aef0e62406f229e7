//! The region hierarchy the algorithm zooms through: the dyadic cube tree
//! or a finite space's zooming DAG.

use std::sync::Arc;

use crate::metric::{
    build_zooming_dag, cube_children, cube_root, representative, ActionSpace, Arm, CubeNode, DagNodeId,
    FiniteSpace, MetricError, RepresentativePolicy, ZoomingDag,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Cube(CubeNode),
    Dag(DagNodeId),
}

#[derive(Debug, Clone)]
pub enum Hierarchy {
    Cube { d: usize, policy: RepresentativePolicy },
    Dag { space: Arc<FiniteSpace>, dag: Arc<ZoomingDag> },
}

/// DAG depth for horizon `T`: `ceil(log2 T) + 1`.
pub fn dag_height(horizon: usize) -> u32 {
    (horizon.max(1) as f64).log2().ceil() as u32 + 1
}

impl Hierarchy {
    pub fn new(
        space: &ActionSpace,
        horizon: usize,
        policy: RepresentativePolicy,
    ) -> Result<Self, MetricError> {
        Ok(match space {
            ActionSpace::Cube { d } => Hierarchy::Cube { d: *d, policy },
            ActionSpace::Finite(f) => Hierarchy::Dag {
                dag: Arc::new(build_zooming_dag(&f.metric, dag_height(horizon))?),
                space: f.clone(),
            },
        })
    }

    pub fn root(&self) -> Region {
        match self {
            Hierarchy::Cube { d, .. } => Region::Cube(cube_root(*d).expect("d >= 1")),
            Hierarchy::Dag { dag, .. } => Region::Dag(dag.root()),
        }
    }

    pub fn children(&self, r: &Region) -> Vec<Region> {
        match (self, r) {
            (Hierarchy::Cube { .. }, Region::Cube(c)) => {
                cube_children(c).into_iter().map(Region::Cube).collect()
            }
            (Hierarchy::Dag { dag, .. }, Region::Dag(id)) => {
                dag.node(*id).children.iter().map(|&c| Region::Dag(c)).collect()
            }
            _ => unreachable!("region does not belong to this hierarchy"),
        }
    }

    /// All regions at height `h`, in left-to-right order for cubes.
    pub fn level(&self, h: u32) -> Vec<Region> {
        let mut out = vec![self.root()];
        match self {
            Hierarchy::Cube { .. } => {
                for _ in 0..h {
                    out = out.iter().flat_map(|r| self.children(r)).collect();
                }
                out
            }
            Hierarchy::Dag { dag, .. } => {
                dag.level(h.min(dag.max_height())).iter().map(|&i| Region::Dag(i)).collect()
            }
        }
    }

    /// `L(u)`: side length for cubes, action radius for DAG nodes.
    pub fn diameter(&self, r: &Region) -> f64 {
        match (self, r) {
            (_, Region::Cube(c)) => c.side(),
            (Hierarchy::Dag { dag, .. }, Region::Dag(id)) => dag.node(*id).action_radius,
            _ => unreachable!(),
        }
    }

    pub fn height(&self, r: &Region) -> u32 {
        match (self, r) {
            (_, Region::Cube(c)) => c.height,
            (Hierarchy::Dag { dag, .. }, Region::Dag(id)) => dag.node(*id).height,
            _ => unreachable!(),
        }
    }

    pub fn arm(&self, r: &Region) -> Arm {
        match (self, r) {
            (Hierarchy::Cube { policy, .. }, Region::Cube(c)) => Arm::Point(representative(c, *policy)),
            (Hierarchy::Dag { dag, .. }, Region::Dag(id)) => Arm::Index(dag.node(*id).center_point),
            _ => unreachable!(),
        }
    }

    pub fn covering_dim(&self) -> f64 {
        match self {
            Hierarchy::Cube { d, .. } => *d as f64,
            Hierarchy::Dag { space, .. } => space.covering_dim,
        }
    }

    pub fn doubling_constant(&self) -> f64 {
        match self {
            Hierarchy::Cube { d, .. } => (1u64 << d) as f64,
            Hierarchy::Dag { space, .. } => space.doubling as f64,
        }
    }

    pub fn is_cube(&self) -> bool {
        matches!(self, Hierarchy::Cube { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::FiniteMetricSpace;

    #[test]
    fn cube_levels_are_ordered() {
        let h = Hierarchy::new(&ActionSpace::cube(1).unwrap(), 16, RepresentativePolicy::Center).unwrap();
        let arms: Vec<Arm> = h.level(2).iter().map(|r| h.arm(r)).collect();
        assert_eq!(arms, [0.125, 0.375, 0.625, 0.875].iter().map(|&x| Arm::scalar(x)).collect::<Vec<_>>());
    }

    #[test]
    fn dag_depth_follows_horizon() {
        assert_eq!(dag_height(1), 1);
        assert_eq!(dag_height(16), 5);
        assert_eq!(dag_height(17), 6);
        let m = FiniteMetricSpace::from_line(&[0.0, 0.5, 1.0]).unwrap();
        let h = Hierarchy::new(&ActionSpace::finite(m, 1.0), 8, RepresentativePolicy::Center).unwrap();
        let Hierarchy::Dag { dag, .. } = &h else { panic!() };
        assert_eq!(dag.max_height(), 4);
        assert_eq!(h.diameter(&h.root()), 1.0);
    }
}
