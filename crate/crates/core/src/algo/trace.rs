//! Per-round records and node registries shared by every algorithm.

use serde::Serialize;

use crate::metric::Arm;

pub type NodeId = usize;

/// Static facts about a node that was ever active.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeInfo {
    pub arm: Arm,
    pub height: u32,
    /// `L(u)`.
    pub diameter: f64,
    /// Node whose zoom-in activated this one.
    pub parent: Option<NodeId>,
    /// First round (phase-local) the node is active.
    pub tau0: usize,
    /// Round it was zoomed in, if ever.
    pub tau1: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoomEvent {
    pub node: NodeId,
    pub children: Vec<NodeId>,
    pub pi: f64,
    pub mass: f64,
    pub conf_tot: f64,
    pub conf_inst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    /// Phase-local round.
    pub t: usize,
    pub node: NodeId,
    pub arm: Arm,
    pub reward: f64,
    pub beta: f64,
    pub beta_tilde: f64,
    pub gamma: f64,
    pub eta: f64,
    /// `|A_t|` during selection.
    pub n_active: usize,
    pub zooms: Vec<ZoomEvent>,
    /// `(node, pi_t(node))` over the active set, in activation order.
    pub pi: Option<Vec<(NodeId, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    AdversarialZooming,
    Exp3pUniform,
}

/// One run of an algorithm with a fixed horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase {
    pub algorithm: AlgorithmKind,
    pub horizon: usize,
    /// Environment round of this phase's round 0.
    pub offset: usize,
    /// Covering dimension and cube flag, used by the node-count monitor.
    pub covering_dim: f64,
    pub cube: bool,
    pub nodes: Vec<NodeInfo>,
    pub records: Vec<RoundRecord>,
}

/// A whole run: one phase, or several under the doubling trick.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub phases: Vec<Phase>,
}

impl Phase {
    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }
}

impl Trace {
    pub fn single(phase: Phase) -> Self {
        Trace { phases: vec![phase] }
    }

    pub fn rounds(&self) -> usize {
        self.phases.iter().map(|p| p.records.len()).sum()
    }

    /// `(environment round, record)` over all phases.
    pub fn iter_global(&self) -> impl Iterator<Item = (usize, &RoundRecord)> + '_ {
        self.phases.iter().flat_map(|p| p.records.iter().map(move |r| (p.offset + r.t, r)))
    }

    pub fn total_reward(&self) -> f64 {
        self.phases.iter().map(Phase::total_reward).sum()
    }

    /// Cumulative reward after each environment round.
    pub fn cumulative_rewards(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.iter_global()
            .map(|(_, r)| {
                acc += r.reward;
                acc
            })
            .collect()
    }

    pub fn arms(&self) -> Vec<Arm> {
        self.iter_global().map(|(_, r)| r.arm.clone()).collect()
    }
}
