//! Allocation solvers: federated and centralized Q-learning, a greedy
//! hill-climber, an LP relaxation and an exact grid oracle.

pub mod greedy;
pub mod mdp;
pub mod oracle;
pub mod qlearn;
pub mod relax;
pub mod simplex;

use thiserror::Error;

use crate::cost::CostBreakdown;
use crate::model::Allocation;

pub use greedy::run_greedy;
pub use mdp::{apply_action, enumerate_actions, Delta, MdpAction, MdpState};
pub use oracle::{oracle_grid_search, Objective, OracleOptions};
pub use qlearn::{aggregate_consensus, run_fql, run_qlearning, Aggregation, Hyperparams, QTable};
pub use relax::run_relaxation;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("action {0} is not legal in this state")]
    IllegalAction(MdpAction),
    #[error("no feasible allocation")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("grid step {0} does not divide 1")]
    BadStep(f64),
    #[error("search budget of {budget} nodes exhausted after {enumerated} nodes")]
    BudgetExceeded { budget: u64, enumerated: u64 },
    #[error("consensus needs at least one update, got n = {0}")]
    EmptyConsensus(usize),
    #[error("local tables have mismatched shapes")]
    ShapeMismatch,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
}

/// Allocation rounded onto the 0.01 grid, with its P2 cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapped {
    pub rho: Allocation,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solver_name: String,
    /// Best feasible allocation found.
    pub best_rho: Allocation,
    /// P2 breakdown of `best_rho`.
    pub best_cost: CostBreakdown,
    /// Value of the objective the solver optimizes (P2 total unless stated).
    pub objective_value: f64,
    /// Best P2 total seen after each round or step.
    pub trajectory: Vec<f64>,
    /// Seconds.
    pub wall_time: f64,
    pub snapped: Option<Snapped>,
    pub notes: Vec<String>,
}
