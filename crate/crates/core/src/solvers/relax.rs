//! Continuous relaxation: minimize the relaxed objective over the polytope
//! of row-stochastic allocations that respect both spectrum budgets.
//!
//! Every quantity in the relaxed objective is affine in the allocation, so
//! the problem is an LP. Its coefficients are read off by evaluating the
//! objective at the zero allocation and at each unit vector, which keeps
//! this module independent of how the bound coefficients are assembled.

use std::time::Instant;

use crate::cost::{objective_p2, objective_p3};
use crate::model::{Allocation, ScenarioConfig, TechKind};
use crate::netcalc::bound_coefficients;

use super::simplex::{minimize, Constraint, LpError, Relation};
use super::{SolveError, SolveResult, Snapped};

impl From<LpError> for SolveError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Unbounded => SolveError::Unbounded,
            LpError::Infeasible | LpError::Shape => SolveError::Infeasible,
        }
    }
}

/// Relative margin kept between each service-rate denominator and zero when
/// the polytope has to be restricted.
const B_MARGIN: f64 = 1e-6;

struct Vars {
    techs: Vec<TechKind>,
    n_tasks: usize,
}

impl Vars {
    fn len(&self) -> usize {
        self.techs.len() * self.n_tasks
    }

    fn index(&self, task: usize, slot: usize) -> usize {
        task * self.techs.len() + slot
    }

    fn to_alloc(&self, x: &[f64]) -> Allocation {
        let mut rho = Allocation::zeros(self.n_tasks);
        for i in 0..self.n_tasks {
            for (slot, &t) in self.techs.iter().enumerate() {
                rho.set(i, t, x[self.index(i, slot)]);
            }
        }
        rho
    }

    fn unit(&self, v: usize) -> Allocation {
        let mut x = vec![0.0; self.len()];
        x[v] = 1.0;
        self.to_alloc(&x)
    }
}

/// `(constant, gradient)` of an affine function of the allocation.
fn affine_form(vars: &Vars, f: impl Fn(&Allocation) -> f64) -> (f64, Vec<f64>) {
    let c0 = f(&Allocation::zeros(vars.n_tasks));
    let grad = (0..vars.len()).map(|v| f(&vars.unit(v)) - c0).collect();
    (c0, grad)
}

/// Removes roundoff from simplex output: clamps tiny negatives and
/// renormalizes each row onto the simplex.
fn clean(vars: &Vars, x: &[f64]) -> Allocation {
    let mut rho = vars.to_alloc(&x.iter().map(|v| v.max(0.0)).collect::<Vec<_>>());
    for i in 0..vars.n_tasks {
        let sum: f64 = rho.row(i).iter().sum();
        for &t in &vars.techs {
            rho.set(i, t, rho.get(i, t) / sum);
        }
    }
    rho
}

pub fn run_relaxation(s: &ScenarioConfig) -> Result<SolveResult, SolveError> {
    let t0 = Instant::now();
    let vars = Vars {
        techs: s.tech_mask.iter().collect(),
        n_tasks: s.n_tasks(),
    };
    let n = vars.len();
    let slot = |t: TechKind| vars.techs.iter().position(|x| *x == t);

    let mut rows = Vec::new();
    for i in 0..vars.n_tasks {
        let mut c = vec![0.0; n];
        for k in 0..vars.techs.len() {
            c[vars.index(i, k)] = 1.0;
        }
        rows.push(Constraint::new(c, Relation::Eq, 1.0));
    }
    let budget_row = |techs: &[TechKind], limit: f64| {
        let mut c = vec![0.0; n];
        for i in 0..vars.n_tasks {
            for &t in techs {
                if let Some(k) = slot(t) {
                    c[vars.index(i, k)] = s.tasks[i].volume(s.horizon);
                }
            }
        }
        Constraint::new(c, Relation::Le, limit)
    };
    rows.push(budget_row(&[TechKind::Cv2i, TechKind::Cv2v], s.r_cv2x * s.horizon));
    rows.push(budget_row(&[TechKind::Dsrc], s.r_dsrc * s.horizon));

    // Keep every denominator of the affine bounds positive on the feasible
    // set; otherwise the relaxed objective stops describing a stable queue.
    let mut notes = Vec::new();
    let mut restrictions = Vec::new();
    for i in 0..vars.n_tasks {
        for &h in &vars.techs {
            let (b0, grad) = affine_form(&vars, |r| bound_coefficients(h, i, r, s).den_b);
            let min = minimize(&grad, &rows)?.objective + b0;
            let scale = if h == TechKind::Cv2i { s.theta_epc } else { s.theta_veh };
            let b_min = B_MARGIN * scale;
            if min < b_min {
                restrictions.push(Constraint::new(grad, Relation::Ge, b_min - b0));
                notes.push(format!("restricted to B[{h}, task {i}] >= {b_min}"));
            }
        }
    }
    rows.extend(restrictions);

    let (_, cost) = affine_form(&vars, |r| objective_p3(r, s));
    let sol = minimize(&cost, &rows)?;
    let rho = clean(&vars, &sol.x);
    let snapped_rho = rho.snap_to_grid();

    let best_cost = objective_p2(&rho, s);
    Ok(SolveResult {
        solver_name: "relax".to_string(),
        objective_value: objective_p3(&rho, s),
        best_cost,
        snapped: Some(Snapped {
            cost: objective_p2(&snapped_rho, s),
            rho: snapped_rho,
        }),
        best_rho: rho,
        trajectory: Vec::new(),
        wall_time: t0.elapsed().as_secs_f64(),
        notes,
    })
}
