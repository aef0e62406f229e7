//! EXP3.P over a fixed uniform discretization.

use serde::{Deserialize, Serialize};

use crate::algo::{mixed_distribution, AlgError, AlgorithmKind, NodeInfo, Phase, RoundRecord};
use crate::env::Environment;
use crate::metric::{greedy_cover, ActionSpace, Arm};
use crate::rng::{sample_index, SelectionRng};

/// Centers of the `ceil(1/eps)^d` cells of side `eps` (the last cell per
/// axis is clipped to the cube).
pub fn uniform_grid(d: usize, eps: f64) -> Vec<Vec<f64>> {
    let k = (1.0 / eps).ceil().max(1.0) as usize;
    let axis: Vec<f64> = (0..k)
        .map(|i| {
            let lo = i as f64 * eps;
            let hi = ((i + 1) as f64 * eps).min(1.0);
            0.5 * (lo + hi)
        })
        .collect();
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// `T^(-1/(d+2))`.
pub fn default_grid_eps(horizon: usize, d: usize) -> f64 {
    (horizon as f64).powf(-1.0 / (d as f64 + 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exp3PParams {
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl Exp3PParams {
    /// `gamma = min(1/2, sqrt(K max(ln K, ln 2) / T))`, `beta = eta = gamma / (2K)`.
    pub fn standard(k: usize, horizon: usize) -> Self {
        let kf = k as f64;
        let gamma = (kf * kf.ln().max(2f64.ln()) / horizon as f64).sqrt().min(0.5);
        Exp3PParams { beta: gamma / (2.0 * kf), gamma, eta: gamma / (2.0 * kf) }
    }
}

/// Arms for a space: the uniform grid on a cube, a greedy `eps`-cover of a
/// finite space.
pub fn discretize(space: &ActionSpace, eps: f64) -> Result<Vec<Arm>, AlgError> {
    Ok(match space {
        ActionSpace::Cube { d } => uniform_grid(*d, eps).into_iter().map(Arm::Point).collect(),
        ActionSpace::Finite(f) => greedy_cover(&f.metric, eps)?.into_iter().map(Arm::Index).collect(),
    })
}

pub struct Exp3PState {
    arms: Vec<Arm>,
    g_hat: Vec<f64>,
    params: Exp3PParams,
    horizon: usize,
    env_offset: usize,
    record_pi: bool,
    t: usize,
    rng: SelectionRng,
    records: Vec<RoundRecord>,
    cell: f64,
}

impl Exp3PState {
    pub fn new(
        arms: Vec<Arm>,
        cell: f64,
        horizon: usize,
        seed: u64,
        params: Exp3PParams,
    ) -> Result<Self, AlgError> {
        if horizon == 0 {
            return Err(AlgError::ZeroHorizon);
        }
        if arms.is_empty() {
            return Err(AlgError::Config("no arms".into()));
        }
        Ok(Exp3PState {
            g_hat: vec![0.0; arms.len()],
            arms,
            params,
            horizon,
            env_offset: 0,
            record_pi: false,
            t: 1,
            rng: SelectionRng::new(seed),
            records: Vec::with_capacity(horizon),
            cell,
        })
    }

    pub fn with_env_offset(mut self, offset: usize) -> Self {
        self.env_offset = offset;
        self
    }

    pub fn with_record_pi(mut self, on: bool) -> Self {
        self.record_pi = on;
        self
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn distribution(&self) -> Vec<f64> {
        let log_w: Vec<f64> = self.g_hat.iter().map(|g| self.params.eta * g).collect();
        mixed_distribution(&log_w, self.params.gamma)
    }

    pub fn is_done(&self) -> bool {
        self.t > self.horizon
    }

    pub fn step(&mut self, env: &Environment) -> Result<&RoundRecord, AlgError> {
        let t = self.t;
        if t > self.horizon {
            return Err(AlgError::PastHorizon { t, horizon: self.horizon });
        }
        let pi = self.distribution();
        let i = sample_index(&pi, self.rng.next_uniform());
        let arm = self.arms[i].clone();
        let reward = env.eval_reward(self.env_offset + t, &arm)?;
        for (j, (g, &q)) in self.g_hat.iter_mut().zip(&pi).enumerate() {
            let ips = if j == i { reward / q } else { 0.0 };
            *g += ips + self.params.beta / q;
        }
        let p = self.params;
        self.records.push(RoundRecord {
            t,
            node: i,
            arm,
            reward,
            beta: p.beta,
            beta_tilde: p.beta,
            gamma: p.gamma,
            eta: p.eta,
            n_active: self.arms.len(),
            zooms: Vec::new(),
            pi: self.record_pi.then(|| pi.iter().copied().enumerate().collect()),
        });
        self.t += 1;
        Ok(self.records.last().unwrap())
    }

    pub fn into_phase(self, space: &ActionSpace) -> Phase {
        let nodes = self
            .arms
            .into_iter()
            .map(|arm| NodeInfo { arm, height: 0, diameter: self.cell, parent: None, tau0: 1, tau1: None })
            .collect();
        Phase {
            algorithm: AlgorithmKind::Exp3pUniform,
            horizon: self.horizon,
            offset: self.env_offset,
            covering_dim: space.covering_dim(),
            cube: matches!(space, ActionSpace::Cube { .. }),
            nodes,
            records: self.records,
        }
    }
}

/// EXP3.P on `discretize(space, eps)` with standard tuning, for the full horizon.
pub fn run_exp3p(
    space: &ActionSpace,
    env: &Environment,
    eps: f64,
    horizon: usize,
    seed: u64,
    record_pi: bool,
) -> Result<Phase, AlgError> {
    let arms = discretize(space, eps)?;
    let params = Exp3PParams::standard(arms.len(), horizon);
    let mut s = Exp3PState::new(arms, eps, horizon, seed, params)?.with_record_pi(record_pi);
    while !s.is_done() {
        s.step(env)?;
    }
    Ok(s.into_phase(space))
}
