//! Resource cost, the penalized objectives and the learner reward.
//!
//! `objective_p2` charges each task its worst (largest) `ln ε` among the
//! paths that actually carry some of its traffic, evaluated at the task's
//! deadline. `objective_p3` replaces that max by the sum over every masked
//! path of the unclamped affine `ln ε`, which makes it linear in the
//! allocation.

use crate::model::{Allocation, ScenarioConfig, TechKind};
use crate::netcalc::bound_coefficients;

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub comm: f64,
    pub comp: f64,
    pub fail_penalty: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub c1_ok: bool,
    pub c2_ok: bool,
    pub c3_ok: bool,
    pub c2_usage: f64,
    pub c2_limit: f64,
    pub c3_usage: f64,
    pub c3_limit: f64,
}

impl FeasibilityReport {
    pub fn all_ok(&self) -> bool {
        self.c1_ok && self.c2_ok && self.c3_ok
    }
}

/// Licensed-spectrum charge of task `i` over the horizon.
pub fn comm_cost(i: usize, rho: &Allocation, s: &ScenarioConfig) -> f64 {
    let t = &s.tasks[i];
    t.fee_cv2x * (rho.get(i, TechKind::Cv2i) + rho.get(i, TechKind::Cv2v)) * t.volume(s.horizon)
}

/// Compute charge of task `i`: VEC pool for C-V2I, the serving vehicle for
/// the V2V paths, nothing for local processing.
pub fn comp_cost(i: usize, rho: &Allocation, s: &ScenarioConfig) -> f64 {
    let t = &s.tasks[i];
    let on_vehicle =
        rho.get(i, TechKind::Cv2v) + rho.get(i, TechKind::Cmmw) + rho.get(i, TechKind::Dsrc);
    (t.fee_infra * rho.get(i, TechKind::Cv2i) + t.fee_veh * on_vehicle)
        * t.complexity
        * t.volume(s.horizon)
}

/// Largest clamped `ln ε` at the deadline over the masked paths that carry
/// traffic of task `i`. Zero when no masked path carries any.
pub fn worst_log_prob(i: usize, rho: &Allocation, s: &ScenarioConfig) -> f64 {
    let d = s.tasks[i].t_max;
    s.tech_mask
        .iter()
        .filter(|h| rho.get(i, *h) > 0.0)
        .map(|h| bound_coefficients(h, i, rho, s).log_prob(d, s.theta))
        .reduce(f64::max)
        .unwrap_or(0.0)
}

fn resource_cost(rho: &Allocation, s: &ScenarioConfig) -> (f64, f64) {
    (0..s.n_tasks()).fold((0.0, 0.0), |(comm, comp), i| {
        (comm + comm_cost(i, rho, s), comp + comp_cost(i, rho, s))
    })
}

pub fn objective_p2(rho: &Allocation, s: &ScenarioConfig) -> CostBreakdown {
    let (comm, comp) = resource_cost(rho, s);
    let fail_penalty: f64 = (0..s.n_tasks())
        .map(|i| s.tasks[i].priority * worst_log_prob(i, rho, s))
        .sum();
    CostBreakdown {
        comm,
        comp,
        fail_penalty,
        total: comm + comp + fail_penalty,
    }
}

/// Penalty term of the relaxed objective: `Σ_i δ_i Σ_h θ(A − T_i·B)`.
pub fn relaxed_penalty(rho: &Allocation, s: &ScenarioConfig) -> f64 {
    (0..s.n_tasks())
        .map(|i| {
            let d = s.tasks[i].t_max;
            let sum: f64 = s
                .tech_mask
                .iter()
                .map(|h| bound_coefficients(h, i, rho, s).unclamped_log_prob(d, s.theta))
                .sum();
            s.tasks[i].priority * sum
        })
        .sum()
}

pub fn objective_p3(rho: &Allocation, s: &ScenarioConfig) -> f64 {
    let (comm, comp) = resource_cost(rho, s);
    comm + comp + relaxed_penalty(rho, s)
}

pub fn feasibility(rho: &Allocation, s: &ScenarioConfig) -> FeasibilityReport {
    let vol = |j: usize| s.tasks[j].volume(s.horizon);
    let c2_usage = rho.weighted_sum(TechKind::Cv2i, vol) + rho.weighted_sum(TechKind::Cv2v, vol);
    let c3_usage = rho.weighted_sum(TechKind::Dsrc, vol);
    let c2_limit = s.r_cv2x * s.horizon;
    let c3_limit = s.r_dsrc * s.horizon;
    FeasibilityReport {
        c1_ok: rho.n_tasks() == s.n_tasks() && rho.is_valid(s.tech_mask),
        c2_ok: c2_usage <= c2_limit + FEAS_TOL,
        c3_ok: c3_usage <= c3_limit + FEAS_TOL,
        c2_usage,
        c2_limit,
        c3_usage,
        c3_limit,
    }
}

/// Shared learner reward: the negated P2 total.
pub fn reward(rho: &Allocation, s: &ScenarioConfig) -> f64 {
    -objective_p2(rho, s).total
}
