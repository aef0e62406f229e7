//! A deliberately naive AdversarialZooming for d = 1 used as a test oracle.
//!
//! Every node carries the full log of multiplicative updates applied to its
//! weight (one estimate per round, one split marker per zoom-in of an
//! ancestor), copied from its parent when it is activated. The weight at
//! any `eta` is rebuilt by folding that log in order. Confidence sums are
//! recomputed by walking the ancestor chain. Parameters, the interval tree
//! and the selection stream are all written out here independently.

#![allow(dead_code)]

use adzoom::env::Environment;
use adzoom::metric::Arm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub enum Update {
    /// `w <- w * exp(eta * g)`
    Estimate(f64),
    /// `w <- w / k`
    Split(usize),
}

#[derive(Debug, Clone)]
pub struct OracleNode {
    pub lo: f64,
    pub hi: f64,
    pub parent: Option<usize>,
    pub log: Vec<Update>,
    /// `beta_tau / pi_tau` for the rounds this node itself was active.
    pub conf: Vec<f64>,
}

impl OracleNode {
    pub fn log_weight(&self, eta: f64) -> f64 {
        let mut w = 1.0f64.ln();
        for u in &self.log {
            match *u {
                Update::Estimate(g) => w += eta * g,
                Update::Split(k) => w -= (k as f64).ln(),
            }
        }
        w
    }
}

#[derive(Debug, Clone)]
pub struct OracleRound {
    pub chosen: usize,
    pub arm: f64,
    pub eta: f64,
    /// `ln w_{t,eta_t}` over the active set in activation order.
    pub log_weights: Vec<f64>,
}

fn raw_beta(t: usize, a: usize, big_t: usize) -> f64 {
    if t == 1 {
        return 0.5;
    }
    let a = a as f64;
    let tt = big_t as f64;
    // d = 1, N_dbl = 2
    let v = (2.0 * (a * tt * tt * tt).ln() * (2.0 * a).ln() / (t as f64 * a * tt.ln().powi(2))).sqrt();
    if v.is_nan() || v > 0.5 {
        0.5
    } else {
        v
    }
}

/// `u` and its ancestors, root last.
pub fn ancestors(nodes: &[OracleNode], u: usize) -> Vec<usize> {
    let mut out = vec![u];
    let mut cur = nodes[u].parent;
    while let Some(v) = cur {
        out.push(v);
        cur = nodes[v].parent;
    }
    out
}

pub fn run_oracle(env: &Environment, horizon: usize, seed: u64) -> Vec<OracleRound> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_t = (horizon as f64).log2();
    let mut nodes = vec![OracleNode { lo: 0.0, hi: 1.0, parent: None, log: vec![], conf: vec![] }];
    let mut active = vec![0usize];
    let mut beta_min = f64::INFINITY;
    let mut out = Vec::new();

    for t in 1..=horizon {
        let a = active.len();
        let beta = raw_beta(t, a, horizon).min(beta_min);
        beta_min = beta;
        let eta = beta;
        let gamma = ((2.0 + 4.0 * log_t) * a as f64 * beta).min(0.5);

        let lw: Vec<f64> = active.iter().map(|&u| nodes[u].log_weight(eta)).collect();
        let top = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = w.iter().sum();
        let pi: Vec<f64> = w.iter().map(|x| (1.0 - gamma) * x / z + gamma / a as f64).collect();

        let uni: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = a - 1;
        for (i, q) in pi.iter().enumerate() {
            acc += q;
            if uni < acc {
                k = i;
                break;
            }
        }
        let chosen = active[k];
        let x = 0.5 * (nodes[chosen].lo + nodes[chosen].hi);
        let reward = env.eval_reward(t, &Arm::scalar(x)).expect("reward");
        out.push(OracleRound { chosen, arm: x, eta, log_weights: lw });

        for (i, &u) in active.iter().enumerate() {
            let ips = if i == k { reward / pi[i] } else { 0.0 };
            let g = ips + (1.0 + 4.0 * log_t) * beta / pi[i];
            nodes[u].log.push(Update::Estimate(g));
            nodes[u].conf.push(beta / pi[i]);
        }

        let mut next = Vec::new();
        let mut born = Vec::new();
        for (i, &u) in active.iter().enumerate() {
            let len = nodes[u].hi - nodes[u].lo;
            let conf_sum: f64 = ancestors(&nodes, u).iter().map(|&v| nodes[v].conf.iter().sum::<f64>()).sum();
            let inst = beta + beta / pi[i];
            let tot = 1.0 / beta + conf_sum;
            if !(inst <= len.exp() - 1.0 && tot <= t as f64 * len) {
                next.push(u);
                continue;
            }
            let mid = 0.5 * (nodes[u].lo + nodes[u].hi);
            let mut log = nodes[u].log.clone();
            log.push(Update::Split(2));
            for (lo, hi) in [(nodes[u].lo, mid), (mid, nodes[u].hi)] {
                nodes.push(OracleNode { lo, hi, parent: Some(u), log: log.clone(), conf: vec![] });
                born.push(nodes.len() - 1);
            }
        }
        next.extend(born);
        active = next;
    }
    out
}
