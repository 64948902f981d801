//! Delay bounds, offloading-failure probabilities and traffic-split
//! optimization for vehicles that can offload work over DSRC, C-V2X
//! (C-V2V and C-V2I) and mmWave links, or process it on board.
//!
//! * [`model`]: scenarios, technology masks and allocations.
//! * [`netcalc`]: stochastic network-calculus delay and failure bounds.
//! * [`cost`]: monetary cost, penalized objectives and constraints.
//! * [`solvers`]: federated Q-learning, baselines, LP relaxation and an
//!   exact grid oracle.
//! * [`harness`]: experiment specs, sweeps and CSV output.

pub mod cost;
pub mod harness;
pub mod model;
pub mod netcalc;
pub mod solvers;

pub use cost::{objective_p2, objective_p3, CostBreakdown, FeasibilityReport};
pub use model::{Allocation, Framework, ScenarioConfig, TaskSpec, TechKind, TechMask};
pub use solvers::{SolveError, SolveResult};
