//! The AdversarialZooming state machine.
//!
//! Weights are never stored. For an active node `u` the weight used at
//! round `t` is `exp(eta_t * G(u)) / c_prod(u)`, where `G(u)` sums the
//! reward estimates of whichever ancestor of `u` was active in each past
//! round and `c_prod(u)` is the product of child counts along its lineage.
//! Children inherit `G` and the confidence sum by value on zoom-in.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::hierarchy::{Hierarchy, Region};
use super::params::{log2_horizon, ParamMode, ParamSchedule, Params};
use super::trace::{AlgorithmKind, NodeId, NodeInfo, Phase, RoundRecord, ZoomEvent};
use crate::env::{EnvError, Environment};
use crate::metric::{ActionSpace, Arm, MetricError, RepresentativePolicy};
use crate::rng::{sample_index, SelectionRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("round {t} exceeds horizon {horizon}")]
    PastHorizon { t: usize, horizon: usize },
    #[error("non-finite weight exponent for node {node} at round {t}")]
    NonFiniteWeight { t: usize, node: NodeId },
    #[error("zoom-in of node {node} at height {height} exceeds log2 T = {limit:.3}")]
    HeightExceeded { node: NodeId, height: u32, limit: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgConfig {
    pub horizon: usize,
    pub seed: u64,
    #[serde(default)]
    pub representative: RepresentativePolicy,
    #[serde(default)]
    pub record_pi: bool,
    /// Disabling zoom-in freezes the initial partition.
    #[serde(default = "yes")]
    pub zoom: bool,
    /// Height of the initial partition.
    #[serde(default)]
    pub init_level: u32,
    #[serde(default)]
    pub params: ParamMode,
    /// Environment round preceding this run's round 1.
    #[serde(default)]
    pub env_offset: usize,
}

fn yes() -> bool {
    true
}

impl AlgConfig {
    pub fn new(horizon: usize, seed: u64) -> Self {
        AlgConfig {
            horizon,
            seed,
            representative: RepresentativePolicy::Center,
            record_pi: false,
            zoom: true,
            init_level: 0,
            params: ParamMode::Tuned,
            env_offset: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub region: Region,
    pub arm: Arm,
    pub diameter: f64,
    pub height: u32,
    /// Sum of reward estimates over the lineage.
    pub g_hat: f64,
    /// Sum of `beta_tau / pi_tau` over the lineage.
    pub s_conf: f64,
    /// `ln c_prod(u)`.
    pub log_c_prod: f64,
    pub tau0: usize,
    /// Probability mass received since activation.
    pub mass: f64,
    pub last_pi: f64,
}

/// `(conf_tot, conf_inst)` of a node after the round's update.
pub fn conf_terms(p: &Params, s_conf: f64, pi: f64) -> (f64, f64) {
    (1.0 / p.beta + s_conf, p.beta_tilde + p.beta / pi)
}

/// The zoom-in rule.
pub fn zoom_rule(p: &Params, t: usize, diameter: f64, s_conf: f64, pi: f64) -> bool {
    let (tot, inst) = conf_terms(p, s_conf, pi);
    inst <= diameter.exp_m1() && tot <= t as f64 * diameter
}

/// `(1 + 4 log2 T) beta_t / pi(u)`, the optimistic part of the estimate.
pub fn confidence_bonus(p: &Params, horizon: usize, pi: f64) -> f64 {
    (1.0 + 4.0 * log2_horizon(horizon)) * p.beta / pi
}

/// Mixes `p` proportional to `exp(log_w)` with uniform exploration.
pub fn mixed_distribution(log_w: &[f64], gamma: f64) -> Vec<f64> {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    let k = log_w.len() as f64;
    w.iter().map(|x| (1.0 - gamma) * x / z + gamma / k).collect()
}

pub struct AlgState {
    hierarchy: Hierarchy,
    config: AlgConfig,
    t: usize,
    active: Vec<NodeState>,
    schedule: ParamSchedule,
    rng: SelectionRng,
    nodes: Vec<NodeInfo>,
    records: Vec<RoundRecord>,
    /// DAG nodes already activated once; they are not reactivated.
    activated: Vec<bool>,
}

impl AlgState {
    pub fn init(space: &ActionSpace, config: AlgConfig) -> Result<Self, AlgError> {
        if config.horizon == 0 {
            return Err(AlgError::ZeroHorizon);
        }
        if let ParamMode::Constant { beta, beta_tilde, gamma, eta } = config.params {
            if [beta, beta_tilde, gamma, eta].iter().any(|v| !(*v > 0.0 && *v <= 0.5)) {
                return Err(AlgError::Config("constant parameters must lie in (0, 1/2]".into()));
            }
        }
        let hierarchy = Hierarchy::new(space, config.horizon, config.representative)?;
        let schedule = ParamSchedule::new(
            config.params,
            config.horizon,
            hierarchy.doubling_constant(),
            hierarchy.covering_dim(),
        );
        let mut s = AlgState {
            rng: SelectionRng::new(config.seed),
            activated: match &hierarchy {
                Hierarchy::Dag { dag, .. } => vec![false; dag.len()],
                Hierarchy::Cube { .. } => Vec::new(),
            },
            hierarchy,
            t: 1,
            active: Vec::new(),
            schedule,
            nodes: Vec::new(),
            records: Vec::new(),
            config,
        };
        let level = s.hierarchy.level(s.config.init_level);
        let log_c = -(1.0 / level.len() as f64).ln();
        for r in level {
            s.activate(r, None, 1, 0.0, 0.0, log_c);
        }
        Ok(s)
    }

    fn activate(
        &mut self,
        region: Region,
        parent: Option<NodeId>,
        tau0: usize,
        g_hat: f64,
        s_conf: f64,
        log_c_prod: f64,
    ) -> NodeId {
        if let Region::Dag(i) = region {
            self.activated[i] = true;
        }
        let id = self.nodes.len();
        let arm = self.hierarchy.arm(&region);
        let diameter = self.hierarchy.diameter(&region);
        let height = self.hierarchy.height(&region);
        self.nodes.push(NodeInfo { arm: arm.clone(), height, diameter, parent, tau0, tau1: None });
        self.active.push(NodeState {
            id,
            region,
            arm,
            diameter,
            height,
            g_hat,
            s_conf,
            log_c_prod,
            tau0,
            mass: 0.0,
            last_pi: 0.0,
        });
        id
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon
    }

    pub fn active(&self) -> &[NodeState] {
        &self.active
    }

    pub fn schedule(&self) -> &ParamSchedule {
        &self.schedule
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn is_done(&self) -> bool {
        self.t > self.config.horizon
    }

    /// `eta * G(u) - ln c_prod(u)` for every active node.
    pub fn log_weights(&self, eta: f64) -> Vec<f64> {
        self.active.iter().map(|u| eta * u.g_hat - u.log_c_prod).collect()
    }

    /// `pi_t` over the active set.
    pub fn distribution(&self, p: &Params) -> Result<Vec<f64>, AlgError> {
        let log_w = self.log_weights(p.eta);
        if let Some(i) = log_w.iter().position(|l| !l.is_finite()) {
            return Err(AlgError::NonFiniteWeight { t: self.t, node: self.active[i].id });
        }
        Ok(mixed_distribution(&log_w, p.gamma))
    }

    /// Runs one round against `env`.
    pub fn step(&mut self, env: &Environment) -> Result<&RoundRecord, AlgError> {
        let t = self.t;
        let horizon = self.config.horizon;
        if t > horizon {
            return Err(AlgError::PastHorizon { t, horizon });
        }
        let p = self.schedule.next(self.active.len());
        let pi = self.distribution(&p)?;
        let chosen = sample_index(&pi, self.rng.next_uniform());
        let arm = self.active[chosen].arm.clone();
        let reward = env.eval_reward(self.config.env_offset + t, &arm)?;
        let n_active = self.active.len();
        for (k, (u, &q)) in self.active.iter_mut().zip(&pi).enumerate() {
            let ips = if k == chosen { reward / q } else { 0.0 };
            u.g_hat += ips + confidence_bonus(&p, horizon, q);
            u.s_conf += p.beta / q;
            u.mass += q;
            u.last_pi = q;
        }
        let pi_snapshot =
            self.config.record_pi.then(|| self.active.iter().map(|u| u.id).zip(pi.iter().copied()).collect());
        let node = self.active[chosen].id;
        let zooms = if self.config.zoom { self.zoom_round(&p)? } else { Vec::new() };
        self.records.push(RoundRecord {
            t,
            node,
            arm,
            reward,
            beta: p.beta,
            beta_tilde: p.beta_tilde,
            gamma: p.gamma,
            eta: p.eta,
            n_active,
            zooms,
            pi: pi_snapshot,
        });
        self.t += 1;
        Ok(self.records.last().unwrap())
    }

    /// Checks every node of `A_t` in activation order; children join the
    /// active set at the end and are first checked next round.
    fn zoom_round(&mut self, p: &Params) -> Result<Vec<ZoomEvent>, AlgError> {
        let t = self.t;
        let limit = log2_horizon(self.config.horizon);
        let current = std::mem::take(&mut self.active);
        let mut kept = Vec::with_capacity(current.len());
        let mut born = Vec::new();
        let mut events = Vec::new();
        for u in current {
            if !zoom_rule(p, t, u.diameter, u.s_conf, u.last_pi) {
                kept.push(u);
                continue;
            }
            if u.height as f64 > limit {
                return Err(AlgError::HeightExceeded { node: u.id, height: u.height, limit });
            }
            let (conf_tot, conf_inst) = conf_terms(p, u.s_conf, u.last_pi);
            self.nodes[u.id].tau1 = Some(t);
            let kids: Vec<Region> = self
                .hierarchy
                .children(&u.region)
                .into_iter()
                .filter(|r| match r {
                    Region::Dag(i) => !self.activated[*i],
                    Region::Cube(_) => true,
                })
                .collect();
            let log_c = u.log_c_prod + (kids.len().max(1) as f64).ln();
            let mut ids = Vec::with_capacity(kids.len());
            for r in kids {
                ids.push(self.activate(r, Some(u.id), t + 1, u.g_hat, u.s_conf, log_c));
            }
            // activate() pushed onto self.active; move them to the newborn list
            born.append(&mut self.active);
            events.push(ZoomEvent {
                node: u.id,
                children: ids,
                pi: u.last_pi,
                mass: u.mass,
                conf_tot,
                conf_inst,
            });
        }
        kept.extend(born);
        self.active = kept;
        Ok(events)
    }

    pub fn into_phase(self) -> Phase {
        Phase {
            algorithm: AlgorithmKind::AdversarialZooming,
            horizon: self.config.horizon,
            offset: self.config.env_offset,
            covering_dim: self.hierarchy.covering_dim(),
            cube: self.hierarchy.is_cube(),
            nodes: self.nodes,
            records: self.records,
        }
    }
}

/// Runs AdversarialZooming for its full horizon.
pub fn run(space: &ActionSpace, env: &Environment, config: AlgConfig) -> Result<Phase, AlgError> {
    let mut s = AlgState::init(space, config)?;
    while !s.is_done() {
        s.step(env)?;
    }
    Ok(s.into_phase())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{MeanFunction, NoiseModel, Preset, StochasticInstance};

    fn line() -> ActionSpace {
        ActionSpace::cube(1).unwrap()
    }

    fn flat(mu: f64, horizon: usize) -> Environment {
        let mean = MeanFunction::CustomTable { points: vec![(0.0, mu)] };
        Environment::stochastic(line(), horizon, 0, StochasticInstance { mean, noise: NoiseModel::None })
            .unwrap()
    }

    fn params(beta: f64, gamma: f64) -> Params {
        Params { beta, beta_tilde: beta, gamma, eta: beta }
    }

    #[test]
    fn init_has_only_the_root() {
        for d in [1, 2] {
            let s = AlgState::init(&ActionSpace::cube(d).unwrap(), AlgConfig::new(16, 0)).unwrap();
            assert_eq!(s.active().len(), 1);
            assert_eq!(s.active()[0].diameter, 1.0);
            assert_eq!(s.distribution(&Params::INITIAL).unwrap(), vec![1.0]);
        }
        assert_eq!(AlgState::init(&line(), AlgConfig::new(0, 0)).err(), Some(AlgError::ZeroHorizon));
    }

    #[test]
    fn distribution_examples() {
        assert_eq!(mixed_distribution(&[0.0, 0.0], 0.0), vec![0.5, 0.5]);
        let p = mixed_distribution(&[-(4.0f64).ln(), 0.0], 0.0);
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert_eq!(mixed_distribution(&[3.0], 0.5), vec![1.0]);
        let q = mixed_distribution(&[1e6, 0.0, -1e6], 0.3);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(q.iter().all(|&x| x >= 0.1 - 1e-15));
    }

    #[test]
    fn estimate_examples() {
        // (1 + 4 log2 16) = 17
        let p = params(0.5, 0.5);
        assert!((0.3 + confidence_bonus(&p, 16, 1.0) - 8.8).abs() < 1e-12);
        let p = params(0.1, 0.5);
        assert!((confidence_bonus(&p, 16, 0.25) - 6.8).abs() < 1e-12);
    }

    #[test]
    fn zoom_rule_examples() {
        let p = params(0.1, 0.5);
        let (_, inst) = conf_terms(&p, 0.0, 0.2);
        assert!((inst - 0.6).abs() < 1e-15 && inst <= 1f64.exp_m1());
        // 1/beta_1 = 2 > L at round 1
        assert!(!zoom_rule(&Params::INITIAL, 1, 1.0, 0.0, 1.0));
    }

    #[test]
    fn first_round_updates_root() {
        let env = flat(0.3, 16);
        let mut s = AlgState::init(&line(), AlgConfig::new(16, 1)).unwrap();
        let rec = s.step(&env).unwrap().clone();
        assert_eq!(rec.t, 1);
        assert!(rec.zooms.is_empty());
        let root = &s.active()[0];
        assert!((root.g_hat - 8.8).abs() < 1e-12);
        s.step(&env).unwrap();
        assert!((s.active()[0].s_conf - 1.0).abs() < 1e-12 || s.active().len() > 1);
    }

    #[test]
    fn single_round_horizon() {
        let env = flat(0.5, 1);
        let phase = run(&line(), &env, AlgConfig::new(1, 3)).unwrap();
        assert_eq!(phase.records.len(), 1);
        assert!(phase.records[0].zooms.is_empty());
    }

    #[test]
    fn zoom_in_inherits_and_splits() {
        let env = Preset::DistanceToTarget.spec().build(&line(), 512, 2).unwrap();
        let mut s = AlgState::init(&line(), AlgConfig::new(512, 2)).unwrap();
        let mut prev = s.active().to_vec();
        while !s.is_done() {
            let rec = s.step(&env).unwrap().clone();
            if let Some(z) = rec.zooms.first() {
                let parent = prev.iter().find(|u| u.id == z.node).unwrap();
                assert_eq!(z.children.len(), 2);
                let kids: Vec<&NodeState> =
                    s.active().iter().filter(|u| z.children.contains(&u.id)).collect();
                assert_eq!(kids[0].g_hat, kids[1].g_hat);
                assert_eq!(kids[0].s_conf, kids[1].s_conf);
                assert!(kids[0].g_hat > parent.g_hat);
                for c in kids {
                    assert_eq!(c.tau0, rec.t + 1);
                    assert_eq!(c.mass, 0.0);
                    assert_eq!(c.diameter, parent.diameter / 2.0);
                    assert!((c.log_c_prod - parent.log_c_prod - 2f64.ln()).abs() < 1e-15);
                }
                assert!(!s.active().iter().any(|u| u.id == z.node));
            }
            for u in s.active() {
                assert!((u.log_c_prod - u.height as f64 * 2f64.ln()).abs() < 1e-12);
            }
            prev = s.active().to_vec();
        }
        let phase = s.into_phase();
        assert!(phase.nodes.len() > 1, "no zoom-in in 512 rounds");
        let ts: Vec<usize> = phase.records.iter().map(|r| r.t).collect();
        assert!(ts.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn same_seed_same_trace() {
        let env = Preset::Concave.spec().build(&line(), 300, 8).unwrap();
        let a = run(&line(), &env, AlgConfig::new(300, 4)).unwrap();
        let b = run(&line(), &env, AlgConfig::new(300, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stepping_past_horizon_fails() {
        let env = flat(0.5, 2);
        let mut s = AlgState::init(&line(), AlgConfig::new(2, 0)).unwrap();
        s.step(&env).unwrap();
        s.step(&env).unwrap();
        assert!(matches!(s.step(&env), Err(AlgError::PastHorizon { .. })));
    }
}
