//! Offline analysis of completed runs: regret, adversarial gaps,
//! eps-optimal sets, covering dimension fits and invariant monitors.

pub mod cover;
pub mod gaps;
pub mod monitor;
pub mod regret;

use thiserror::Error;

use crate::metric::MetricError;

pub use cover::{covering_count, dimension_fit, least_squares, CoverReport};
pub use gaps::{
    adversarial_gap, end_time_ladder, eps_optimal_from_table, eps_optimal_set, eps_optimal_threshold,
    gap_iid, gap_table, mean_gap_table, EpsOptimalParams, GapTable, EPS_OPTIMAL_MULTIPLIER,
};
pub use monitor::{inherited_diameter, monitor, monitor_phase, node_count_bound, Check, Violation};
pub use regret::{default_regret_grid_eps, evaluation_grid, regret, RegretReport, MAX_EVALUATIONS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("grid of {arms} arms over {rounds} rounds exceeds {limit} evaluations")]
    GridTooLarge { arms: usize, rounds: usize, limit: usize },
    #[error("need at least 3 ladder points to fit, got {0}")]
    LadderTooShort(usize),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}
