//! Adversarial Lipschitz bandits with adaptive discretization.
//!
//! The crate simulates AdversarialZooming against oblivious adversaries on
//! `[0,1]^d` or finite metric spaces, alongside a uniform-grid EXP3.P
//! baseline, and measures regret and the algorithm's structural
//! guarantees on the recorded traces.

pub mod algo;
pub mod baselines;
pub mod env;
pub mod eval;
pub mod experiment;
pub mod metric;
pub mod parallel;
pub mod rng;

pub use parallel::Exec;
