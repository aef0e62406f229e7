//! Post-run check of the conditions the regret analysis places on the
//! parameter sequences. Reporting only.

use serde::Serialize;

use super::params::log2_horizon;
use super::trace::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `eta_t <= beta_t`
    EtaBelowBeta,
    /// `beta_t <= gamma_t / |A_t|`
    BetaBelowExploration,
    /// `eta_t (1 + beta_t (1 + 4 log2 T)) <= gamma_t / |A_t|`
    EtaWithBonus,
    /// `beta_tilde` non-increasing
    BetaTildeMonotone,
    /// `beta_tilde_t >= beta_t`
    BetaTildeAboveBeta,
    /// `sum_{t <= tau < t'} beta_tilde_tau <= 1/beta_t' - 1/beta_t` for some `t < t'`
    Window,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionViolation {
    pub t: usize,
    pub clause: Clause,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AssumptionReport {
    pub rounds: usize,
    pub violations: Vec<AssumptionViolation>,
}

impl AssumptionReport {
    pub fn rounds_with(&self, clause: Clause) -> Vec<usize> {
        self.violations.iter().filter(|v| v.clause == clause).map(|v| v.t).collect()
    }
}

const TOL: f64 = 1e-12;

pub fn check_assumptions(phase: &Phase) -> AssumptionReport {
    let mut out = Vec::new();
    let bonus = 1.0 + 4.0 * log2_horizon(phase.horizon);
    let mut push = |t, clause, lhs: f64, rhs: f64| {
        if lhs > rhs + TOL {
            out.push(AssumptionViolation { t, clause, lhs, rhs });
        }
    };
    let mut prev_tilde = f64::INFINITY;
    // F(k) = sum_{tau < k} beta_tilde_tau - 1/beta_k must be non-increasing
    let mut prefix = 0.0;
    let mut best_f = f64::INFINITY;
    for r in &phase.records {
        let share = r.gamma / r.n_active as f64;
        push(r.t, Clause::EtaBelowBeta, r.eta, r.beta);
        push(r.t, Clause::BetaBelowExploration, r.beta, share);
        push(r.t, Clause::EtaWithBonus, r.eta * (1.0 + r.beta * bonus), share);
        push(r.t, Clause::BetaTildeMonotone, r.beta_tilde, prev_tilde);
        push(r.t, Clause::BetaTildeAboveBeta, r.beta, r.beta_tilde);
        let f = prefix - 1.0 / r.beta;
        push(r.t, Clause::Window, f, best_f);
        best_f = best_f.min(f);
        prefix += r.beta_tilde;
        prev_tilde = r.beta_tilde;
    }
    AssumptionReport { rounds: phase.records.len(), violations: out }
}
