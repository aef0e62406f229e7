//! Zooming DAG for finite metric spaces.
//!
//! Level `h` holds balls of radius `r = 2^-h` centred on a greedy
//! `2r`-cover of the space. The children of a node are the nodes one level
//! down whose balls intersect its own.

use serde::Serialize;

use super::finite::{greedy_cover, FiniteMetricSpace};
use super::MetricError;

pub type DagNodeId = usize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DagNode {
    /// Index of the center point in the space.
    pub center_point: usize,
    pub action_radius: f64,
    pub height: u32,
    pub children: Vec<DagNodeId>,
    pub parents: Vec<DagNodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoomingDag {
    nodes: Vec<DagNode>,
    levels: Vec<Vec<DagNodeId>>,
}

/// A failed structural property, reported by [`ZoomingDag::verify`].
#[derive(Debug, Clone, PartialEq)]
pub enum DagViolation {
    /// (a) a point of `B(u)` is outside every child ball.
    NotCovered { node: DagNodeId, point: usize },
    /// (b) a child ball does not meet its parent ball.
    NoOverlap { node: DagNodeId, child: DagNodeId },
    /// (c) two same-radius centers at distance at most the radius.
    TooClose { a: DagNodeId, b: DagNodeId },
    /// Some ball in the sub-DAG of `node` reaches beyond `3 r(node)`.
    SpanTooWide { node: DagNodeId, point: usize },
}

pub fn build_zooming_dag(space: &FiniteMetricSpace, max_height: u32) -> Result<ZoomingDag, MetricError> {
    let mut nodes: Vec<DagNode> = Vec::new();
    let mut levels: Vec<Vec<DagNodeId>> = Vec::new();
    for h in 0..=max_height {
        let r = 0.5f64.powi(h as i32);
        let centers = greedy_cover(space, 2.0 * r)?;
        let ids: Vec<DagNodeId> = centers
            .into_iter()
            .map(|c| {
                nodes.push(DagNode {
                    center_point: c,
                    action_radius: r,
                    height: h,
                    children: Vec::new(),
                    parents: Vec::new(),
                });
                nodes.len() - 1
            })
            .collect();
        levels.push(ids);
    }
    for h in 0..max_height as usize {
        for &u in &levels[h] {
            for &v in &levels[h + 1] {
                if balls_meet(space, &nodes[u], &nodes[v]) {
                    nodes[u].children.push(v);
                    nodes[v].parents.push(u);
                }
            }
        }
    }
    Ok(ZoomingDag { nodes, levels })
}

fn balls_meet(space: &FiniteMetricSpace, a: &DagNode, b: &DagNode) -> bool {
    (0..space.len()).any(|p| {
        space.d(p, a.center_point) <= a.action_radius && space.d(p, b.center_point) <= b.action_radius
    })
}

impl ZoomingDag {
    pub fn root(&self) -> DagNodeId {
        self.levels[0][0]
    }

    pub fn node(&self, id: DagNodeId) -> &DagNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_height(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub fn level(&self, h: u32) -> &[DagNodeId] {
        &self.levels[h as usize]
    }

    pub fn max_children(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).max().unwrap_or(0)
    }

    /// Points in the closed action-ball of `id`.
    pub fn ball(&self, space: &FiniteMetricSpace, id: DagNodeId) -> Vec<usize> {
        let n = &self.nodes[id];
        space.ball(n.center_point, n.action_radius)
    }

    /// Exhaustive check of properties (a)-(c) plus the `3r` action-span
    /// containment. Returns every violation found.
    pub fn verify(&self, space: &FiniteMetricSpace) -> Vec<DagViolation> {
        let mut out = Vec::new();
        for (id, u) in self.nodes.iter().enumerate() {
            if u.height < self.max_height() {
                for p in self.ball(space, id) {
                    let hit = u
                        .children
                        .iter()
                        .any(|&c| space.d(p, self.nodes[c].center_point) <= self.nodes[c].action_radius);
                    if !hit {
                        out.push(DagViolation::NotCovered { node: id, point: p });
                    }
                }
            }
            for &c in &u.children {
                if !balls_meet(space, u, &self.nodes[c]) {
                    out.push(DagViolation::NoOverlap { node: id, child: c });
                }
            }
        }
        for level in &self.levels {
            for (i, &a) in level.iter().enumerate() {
                for &b in &level[i + 1..] {
                    let (na, nb) = (&self.nodes[a], &self.nodes[b]);
                    if space.d(na.center_point, nb.center_point) <= na.action_radius {
                        out.push(DagViolation::TooClose { a, b });
                    }
                }
            }
        }
        for (id, u) in self.nodes.iter().enumerate() {
            let limit = 3.0 * u.action_radius;
            let mut stack = vec![id];
            let mut seen = vec![false; self.nodes.len()];
            while let Some(v) = stack.pop() {
                if std::mem::replace(&mut seen[v], true) {
                    continue;
                }
                for p in self.ball(space, v) {
                    if space.d(p, u.center_point) > limit + 1e-12 {
                        out.push(DagViolation::SpanTooWide { node: id, point: p });
                    }
                }
                stack.extend(&self.nodes[v].children);
            }
        }
        out
    }
}
