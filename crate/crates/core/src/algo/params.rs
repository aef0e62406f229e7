//! Parameter schedules `(beta, beta_tilde, gamma, eta)`.

use serde::{Deserialize, Serialize};

pub const PARAM_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub beta: f64,
    pub beta_tilde: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl Params {
    pub const INITIAL: Params =
        Params { beta: PARAM_MAX, beta_tilde: PARAM_MAX, gamma: PARAM_MAX, eta: PARAM_MAX };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ParamMode {
    #[default]
    Tuned,
    /// Fixed values every round, round one included.
    Constant { beta: f64, beta_tilde: f64, gamma: f64, eta: f64 },
}

/// `log2 T`.
pub fn log2_horizon(horizon: usize) -> f64 {
    (horizon as f64).log2()
}

fn clamp_param(v: f64) -> f64 {
    if v.is_nan() || v > PARAM_MAX {
        PARAM_MAX
    } else {
        v.max(f64::MIN_POSITIVE)
    }
}

/// The tuned values before any running minimum:
/// `beta = sqrt(2 ln(|A| T^3) ln(N |A|)) / sqrt(t |A| d ln^2 T)`,
/// `gamma = (2 + 4 log2 T) |A| beta`, each clamped into `(0, 1/2]`.
/// Round one is pinned to `1/2`.
pub fn params(t: usize, a_size: usize, horizon: usize, n_dbl: f64, d: f64) -> Params {
    if t <= 1 {
        return Params::INITIAL;
    }
    let a = a_size as f64;
    let big_t = horizon as f64;
    let ln_t = big_t.ln();
    let num = (2.0 * (a * big_t.powi(3)).ln() * (n_dbl * a).ln()).sqrt();
    let den = (t as f64 * a * d * ln_t * ln_t).sqrt();
    let beta = clamp_param(num / den);
    let gamma = clamp_param((2.0 + 4.0 * log2_horizon(horizon)) * a * beta);
    Params { beta, beta_tilde: beta, gamma, eta: beta }
}

/// Per-run schedule: applies the running minimum to `beta` and `eta` and
/// keeps the history.
#[derive(Debug, Clone)]
pub struct ParamSchedule {
    mode: ParamMode,
    horizon: usize,
    n_dbl: f64,
    d: f64,
    history: Vec<Params>,
}

impl ParamSchedule {
    pub fn new(mode: ParamMode, horizon: usize, n_dbl: f64, d: f64) -> Self {
        ParamSchedule { mode, horizon, n_dbl, d, history: Vec::new() }
    }

    /// Parameters for round `t = history.len() + 1` with `a_size` active nodes.
    pub fn next(&mut self, a_size: usize) -> Params {
        let t = self.history.len() + 1;
        let p = match self.mode {
            ParamMode::Constant { beta, beta_tilde, gamma, eta } => Params { beta, beta_tilde, gamma, eta },
            ParamMode::Tuned => {
                let raw = params(t, a_size, self.horizon, self.n_dbl, self.d);
                match self.history.last() {
                    None => raw,
                    Some(prev) => {
                        let beta = raw.beta.min(prev.beta);
                        let eta = raw.eta.min(prev.eta);
                        let gamma =
                            clamp_param((2.0 + 4.0 * log2_horizon(self.horizon)) * a_size as f64 * beta);
                        Params { beta, beta_tilde: beta, gamma, eta }
                    }
                }
            }
        };
        self.history.push(p);
        p
    }

    pub fn history(&self) -> &[Params] {
        &self.history
    }

    pub fn current(&self) -> Option<Params> {
        self.history.last().copied()
    }
}
