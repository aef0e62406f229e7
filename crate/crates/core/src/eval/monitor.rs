//! Runtime checks of the structural guarantees of the zooming rule.
//!
//! Confidence sums and probability masses are recomputed from the recorded
//! `pi` snapshots and the zoom lineage rather than read from the algorithm.
//! Without snapshots the per-event values stored in the trace are used and
//! the per-round checks are skipped.

use serde::Serialize;

use crate::algo::{log2_horizon, AlgorithmKind, NodeId, NodeInfo, Phase, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `conf_tot_t(u) >= (t - 1) L(u)` for active `u`.
    ZoomingInvariant,
    /// `|A_t| <= (9t)^(d/(d+2))`.
    NodeCount,
    /// `mass(u) >= 1 / (9 L(u)^2)` at zoom-in.
    MassAtZoom,
    /// `tau1(u) >= 2 tau1(parent) - 2`.
    Lifespan,
    /// Activated nodes have `h(u) <= 1 + log2 T`.
    ActivatedHeight,
    /// Zoomed nodes have `h(u) <= log2 tau1(u)`.
    ZoomedHeight,
    /// `pi_t(u) >= beta_t / e^L(u)` at zoom-in.
    PiAtZoom,
    /// `sum pi_t = 1`.
    PiSum,
    /// `pi_t(u) >= gamma_t / |A_t|`.
    PiFloor,
    /// `sum_tau L(act_tau(u)) <= 4 t log2 T L(u)`.
    InheritedDiameter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: Check,
    /// Phase-local round.
    pub t: usize,
    pub phase: usize,
    pub node: Option<NodeId>,
    /// The inequality `lhs >= rhs` (or `lhs <= rhs` for upper bounds) that failed.
    pub lhs: f64,
    pub rhs: f64,
}

const REL_TOL: f64 = 1e-9;
const PI_TOL: f64 = 1e-12;

fn below(lhs: f64, rhs: f64) -> bool {
    lhs < rhs - REL_TOL * rhs.abs().max(1.0)
}

/// `floor((9t)^(d/(d+2)))`.
pub fn node_count_bound(t: usize, d: f64) -> usize {
    ((9.0 * t as f64).powf(d / (d + 2.0)) + 1e-9).floor() as usize
}

/// `sum_{tau <= t} L(act_tau(u))` along the recorded lineage of `u`.
pub fn inherited_diameter(nodes: &[NodeInfo], u: NodeId, t: usize) -> f64 {
    let mut sum = 0.0;
    let mut end = t + 1;
    let mut cur = Some(u);
    while let Some(v) = cur {
        let n = &nodes[v];
        let start = n.tau0.min(end);
        sum += n.diameter * (end - start) as f64;
        end = start;
        cur = n.parent;
    }
    // rounds before the oldest ancestor's activation belong to nothing
    sum
}

/// Every violation in one phase.
pub fn monitor_phase(phase: &Phase, phase_index: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |check, t, node, lhs: f64, rhs: f64| {
        out.push(Violation { check, t, phase: phase_index, node, lhs, rhs });
    };
    let zooming = phase.algorithm == AlgorithmKind::AdversarialZooming;
    let big_t = phase.horizon;
    let log_t = log2_horizon(big_t);
    let nodes = &phase.nodes;
    let have_pi = phase.records.iter().all(|r| r.pi.is_some());
    let mut s_conf = vec![0.0; nodes.len()];
    let mut mass = vec![0.0; nodes.len()];

    if zooming {
        for (id, n) in nodes.iter().enumerate() {
            if n.parent.is_none() && n.height as f64 > 1.0 + log_t + REL_TOL {
                flag(Check::ActivatedHeight, n.tau0, Some(id), n.height as f64, 1.0 + log_t);
            }
        }
    }

    for r in &phase.records {
        let t = r.t;
        if zooming && phase.cube {
            let bound = node_count_bound(t, phase.covering_dim);
            if r.n_active > bound {
                flag(Check::NodeCount, t, None, r.n_active as f64, bound as f64);
            }
        }
        if let Some(pi) = &r.pi {
            let sum: f64 = pi.iter().map(|p| p.1).sum();
            if (sum - 1.0).abs() > PI_TOL {
                flag(Check::PiSum, t, None, sum, 1.0);
            }
            let floor = r.gamma / pi.len() as f64;
            for &(id, q) in pi {
                if q < floor - PI_TOL {
                    flag(Check::PiFloor, t, Some(id), q, floor);
                }
            }
            if zooming {
                for &(id, q) in pi {
                    s_conf[id] += r.beta / q;
                    mass[id] += q;
                    let conf_tot = 1.0 / r.beta + s_conf[id];
                    let need = (t as f64 - 1.0) * nodes[id].diameter;
                    if below(conf_tot, need) {
                        flag(Check::ZoomingInvariant, t, Some(id), conf_tot, need);
                    }
                    if big_t >= 2 {
                        let lhs = inherited_diameter(nodes, id, t);
                        let cap = 4.0 * t as f64 * log_t * nodes[id].diameter;
                        if below(cap, lhs) {
                            flag(Check::InheritedDiameter, t, Some(id), lhs, cap);
                        }
                    }
                }
            }
        }
        for z in &r.zooms {
            let u = &nodes[z.node];
            let l = u.diameter;
            let m = if have_pi { mass[z.node] } else { z.mass };
            if below(m, 1.0 / (9.0 * l * l)) {
                flag(Check::MassAtZoom, t, Some(z.node), m, 1.0 / (9.0 * l * l));
            }
            let floor = r.beta / l.exp();
            if below(z.pi, floor) {
                flag(Check::PiAtZoom, t, Some(z.node), z.pi, floor);
            }
            if !have_pi && below(z.conf_tot, (t as f64 - 1.0) * l) {
                flag(Check::ZoomingInvariant, t, Some(z.node), z.conf_tot, (t as f64 - 1.0) * l);
            }
            if let Some(p) = u.parent {
                if let Some(tp) = nodes[p].tau1 {
                    let need = 2.0 * tp as f64 - 2.0;
                    if below(t as f64, need) {
                        flag(Check::Lifespan, t, Some(z.node), t as f64, need);
                    }
                }
            }
            if u.height as f64 > (t as f64).log2() + REL_TOL {
                flag(Check::ZoomedHeight, t, Some(z.node), u.height as f64, (t as f64).log2());
            }
            for &c in &z.children {
                if nodes[c].height as f64 > 1.0 + log_t + REL_TOL {
                    flag(Check::ActivatedHeight, t, Some(c), nodes[c].height as f64, 1.0 + log_t);
                }
                s_conf[c] = s_conf[z.node];
            }
        }
    }
    out
}

/// Violations across all phases of a trace.
pub fn monitor(trace: &Trace) -> Vec<Violation> {
    trace.phases.iter().enumerate().flat_map(|(i, p)| monitor_phase(p, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algo::{run, AlgConfig, RoundRecord, ZoomEvent};
    use crate::env::Preset;
    use crate::metric::{ActionSpace, Arm};

    fn record(t: usize, n_active: usize, zooms: Vec<ZoomEvent>) -> RoundRecord {
        RoundRecord {
            t,
            node: 0,
            arm: Arm::scalar(0.5),
            reward: 0.0,
            beta: 0.5,
            beta_tilde: 0.5,
            gamma: 0.5,
            eta: 0.5,
            n_active,
            zooms,
            pi: None,
        }
    }

    fn node(height: u32, parent: Option<usize>, tau0: usize, tau1: Option<usize>) -> NodeInfo {
        NodeInfo { arm: Arm::scalar(0.5), height, diameter: 0.5f64.powi(height as i32), parent, tau0, tau1 }
    }

    #[test]
    fn fabricated_premature_zoom_is_the_only_violation() {
        let zoom =
            ZoomEvent { node: 0, children: vec![1, 2], pi: 0.9, mass: 0.05, conf_tot: 2.5, conf_inst: 0.6 };
        let phase = Phase {
            algorithm: AlgorithmKind::AdversarialZooming,
            horizon: 16,
            offset: 0,
            covering_dim: 1.0,
            cube: true,
            nodes: vec![node(0, None, 1, Some(3)), node(1, Some(0), 4, None), node(1, Some(0), 4, None)],
            records: vec![
                record(1, 1, vec![]),
                record(2, 1, vec![]),
                record(3, 1, vec![zoom]),
                record(4, 2, vec![]),
            ],
        };
        let v = monitor_phase(&phase, 0);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].check, Check::MassAtZoom);
    }

    #[test]
    fn node_count_bound_arithmetic() {
        assert_eq!(node_count_bound(9, 1.0), 4);
        assert_eq!(node_count_bound(1, 1.0), 2);
        assert_eq!(node_count_bound(3, 1.0), 3);
    }

    #[test]
    fn inherited_diameter_examples() {
        let nodes = vec![node(0, None, 1, Some(5)), node(1, Some(0), 6, None)];
        assert_eq!(inherited_diameter(&nodes, 0, 4), 4.0);
        // (tau0 - 1) * 1 + (t - tau0 + 1) / 2
        assert_eq!(inherited_diameter(&nodes, 1, 10), 5.0 + 5.0 * 0.5);
    }

    #[test]
    fn real_runs_are_clean() {
        let space = ActionSpace::cube(1).unwrap();
        for preset in [Preset::DistanceToTarget, Preset::Concave, Preset::Combined2, Preset::PricingUniform] {
            let env = preset.spec().build(&space, 1024, 11).unwrap();
            let mut cfg = AlgConfig::new(1024, 5);
            cfg.record_pi = true;
            let phase = run(&space, &env, cfg).unwrap();
            let v = monitor(&Trace::single(phase));
            assert!(v.is_empty(), "{preset:?}: {:?}", &v[..v.len().min(5)]);
        }
    }
}
