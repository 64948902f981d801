//! Exact optimum over the per-task allocation grid.
//!
//! Each task's row ranges over the compositions of `1/step` units into the
//! masked technologies. The product space is searched depth-first, task by
//! task, with a lower bound that treats every unassigned task through the
//! range of its possible contributions to the shared load terms. Bounds
//! only prune nodes that cannot beat the incumbent, so the result equals
//! full enumeration (checked against it in tests).

use std::time::Instant;

use crate::cost::{feasibility, objective_p2, objective_p3, CostBreakdown};
use crate::model::{Allocation, ScenarioConfig, TechKind, N_TECH};
use crate::netcalc::dsrc_access_overhead;

use super::{SolveError, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    P2,
    P3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub step: f64,
    pub objective: Objective,
    /// Maximum number of search nodes (interior and leaves).
    pub budget: u64,
    /// Disable to enumerate every grid point.
    pub prune: bool,
}

impl OracleOptions {
    pub fn new(step: f64, objective: Objective) -> Self {
        OracleOptions {
            step,
            objective,
            budget: 20_000_000,
            prune: true,
        }
    }
}

/// Grid points per task: compositions of `1/step` into `n_techs` parts.
pub fn grid_points(n_techs: usize, step: f64) -> Result<u64, SolveError> {
    let units = grid_units(step)?;
    // C(units + n − 1, n − 1), exact in u64 for any practical size.
    let k = n_techs.saturating_sub(1) as u64;
    let mut c = 1u64;
    for j in 1..=k {
        c = c * (units + j) / j;
    }
    Ok(c)
}

fn grid_units(step: f64) -> Result<u64, SolveError> {
    let units = (1.0 / step).round();
    if !(step > 0.0) || units < 1.0 || (units * step - 1.0).abs() > 1e-9 {
        return Err(SolveError::BadStep(step));
    }
    Ok(units as u64)
}

fn compositions(units: u64, techs: &[TechKind]) -> Vec<[f64; N_TECH]> {
    fn rec(units: u64, techs: &[TechKind], cur: &mut [u64; N_TECH], total: u64, out: &mut Vec<[f64; N_TECH]>) {
        let (&t, rest) = techs.split_first().expect("non-empty mask");
        if rest.is_empty() {
            cur[t.index()] = units;
            out.push(cur.map(|p| p as f64 / total as f64));
            cur[t.index()] = 0;
            return;
        }
        for p in (0..=units).rev() {
            cur[t.index()] = p;
            rec(units - p, rest, cur, total, out);
        }
        cur[t.index()] = 0;
    }
    let mut out = Vec::new();
    rec(units, techs, &mut [0; N_TECH], units, &mut out);
    out
}

// Indices into the load aggregates a task contributes to.
const WL: usize = 0; // on-board weighted rate
const WO: usize = 1; // on-board weighted burst
const DSO: usize = 2; // DSRC burst (CmmW control)
const CVC: usize = 3; // Σ ρ^cv2v (RmmW control)
const VIO: usize = 4; // V2I burst
const VIL: usize = 5; // V2I rate
const C2: usize = 6; // licensed volume
const C3: usize = 7; // DSRC volume
const N_AGG: usize = 8;

type Agg = [f64; N_AGG];

fn add(a: &Agg, b: &Agg) -> Agg {
    std::array::from_fn(|k| a[k] + b[k])
}

fn sub(a: &Agg, b: &Agg) -> Agg {
    std::array::from_fn(|k| a[k] - b[k])
}

struct Search<'a> {
    s: &'a ScenarioConfig,
    opts: OracleOptions,
    techs: Vec<TechKind>,
    cands: Vec<[f64; N_TECH]>,
    /// Per task and candidate: aggregate contribution.
    contrib: Vec<Vec<Agg>>,
    /// Per task and candidate: resource cost (P2) or full linear term (P3).
    own: Vec<Vec<f64>>,
    /// Per task: elementwise minimum contribution over candidates.
    min_contrib: Vec<Agg>,
    /// `suffix_lo[d] = Σ_{j ≥ d} min_contrib[j]`.
    suffix_lo: Vec<Agg>,
    p3_const: f64,
    dsrc_ovh: f64,
    limits: (f64, f64),
    incumbent: f64,
    best: Option<Vec<usize>>,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn new(s: &'a ScenarioConfig, opts: OracleOptions) -> Result<Self, SolveError> {
        let techs: Vec<TechKind> = s.tech_mask.iter().collect();
        let cands = compositions(grid_units(opts.step)?, &techs);
        let k = s.n_tasks();
        let n = f64::from(s.n_vehicles);

        let mut contrib = Vec::with_capacity(k);
        let mut own = Vec::with_capacity(k);
        let mut p3_const = 0.0;
        let mut p3_grad = vec![[0.0; N_TECH]; k];
        if opts.objective == Objective::P3 {
            p3_const = objective_p3(&Allocation::zeros(k), s);
            for (i, g) in p3_grad.iter_mut().enumerate() {
                for &t in &techs {
                    let mut e = Allocation::zeros(k);
                    e.set(i, t, 1.0);
                    g[t.index()] = objective_p3(&e, s) - p3_const;
                }
            }
        }
        for i in 0..k {
            let task = &s.tasks[i];
            let vol = task.volume(s.horizon);
            let mut ci = Vec::with_capacity(cands.len());
            let mut oi = Vec::with_capacity(cands.len());
            for c in &cands {
                let r = |t: TechKind| c[t.index()];
                let w = (1.0 - r(TechKind::Cv2i) + (n - 1.0) * r(TechKind::Local)) / n;
                ci.push([
                    w * task.arrival_rate,
                    w * task.burstiness,
                    r(TechKind::Dsrc) * task.burstiness,
                    r(TechKind::Cv2v),
                    r(TechKind::Cv2i) * task.burstiness,
                    r(TechKind::Cv2i) * task.arrival_rate,
                    (r(TechKind::Cv2i) + r(TechKind::Cv2v)) * vol,
                    r(TechKind::Dsrc) * vol,
                ]);
                oi.push(match opts.objective {
                    Objective::P2 => {
                        let licensed = r(TechKind::Cv2i) + r(TechKind::Cv2v);
                        let on_vehicle = r(TechKind::Cv2v) + r(TechKind::Cmmw) + r(TechKind::Dsrc);
                        task.fee_cv2x * licensed * vol
                            + (task.fee_infra * r(TechKind::Cv2i) + task.fee_veh * on_vehicle)
                                * task.complexity
                                * vol
                    }
                    Objective::P3 => techs.iter().map(|t| p3_grad[i][t.index()] * r(*t)).sum(),
                });
            }
            contrib.push(ci);
            own.push(oi);
        }
        let min_contrib: Vec<Agg> = contrib
            .iter()
            .map(|ci| {
                ci.iter()
                    .fold([f64::INFINITY; N_AGG], |m, a| std::array::from_fn(|q| m[q].min(a[q])))
            })
            .collect();
        let mut suffix_lo = vec![[0.0; N_AGG]; k + 1];
        for d in (0..k).rev() {
            suffix_lo[d] = add(&suffix_lo[d + 1], &min_contrib[d]);
        }

        Ok(Search {
            s,
            opts,
            techs,
            cands,
            contrib,
            own,
            min_contrib,
            suffix_lo,
            p3_const,
            dsrc_ovh: s
                .dsrc_access_overhead_mb
                .unwrap_or_else(|| dsrc_access_overhead(&s.mac, s.r_dsrc)),
            limits: (s.r_cv2x * s.horizon, s.r_dsrc * s.horizon),
            incumbent: f64::INFINITY,
            best: None,
            nodes: 0,
        })
    }

    fn tol(&self) -> f64 {
        1e-9 * self.incumbent.abs().max(1.0)
    }

    fn budget_ok(&self, lo: &Agg) -> bool {
        lo[C2] <= self.limits.0 + 1e-9 && lo[C3] <= self.limits.1 + 1e-9
    }

    /// Lower bound on task `i`'s objective term when it takes candidate `c`
    /// and every aggregate is at least `lo` (own contribution included).
    fn term_lb(&self, i: usize, c: usize, lo: &Agg) -> f64 {
        if self.opts.objective == Objective::P3 {
            return self.own[i][c];
        }
        let s = self.s;
        let task = &s.tasks[i];
        let row = &self.cands[c];
        let mut worst = f64::NEG_INFINITY;
        for &h in &self.techs {
            let share = row[h.index()];
            if share <= 0.0 {
                continue;
            }
            let self_rate = share * task.arrival_rate;
            let (a, b_hi) = match h {
                TechKind::Cv2i => (lo[VIO], s.theta_epc - (lo[VIL] - self_rate)),
                TechKind::Local => (lo[WO], s.theta_veh - lo[WL]),
                _ => {
                    let extra = match h {
                        TechKind::Dsrc => self.dsrc_ovh,
                        TechKind::Cmmw => 2.0 * lo[DSO],
                        _ if s.rmmw_control => 4.0 * s.rts_burstiness * lo[CVC],
                        _ => 0.0,
                    };
                    (lo[WO] + extra, s.theta_veh - lo[WL] + self_rate)
                }
            };
            worst = worst.max(s.theta * (a - task.t_max * b_hi));
        }
        self.own[i][c] + task.priority * worst.min(0.0)
    }

    /// Lower bound of the subtree where tasks `0..d` take `assigned`, plus
    /// the per-candidate bound of task `d` for child ordering.
    fn node_bound(&self, assigned: &[usize], sum: &Agg) -> (f64, Vec<(f64, usize)>) {
        let d = assigned.len();
        let k = self.s.n_tasks();
        let base = add(sum, &self.suffix_lo[d]);
        let mut lb = self.p3_const;
        for (i, &c) in assigned.iter().enumerate() {
            lb += self.term_lb(i, c, &base);
        }
        let mut children = Vec::new();
        for i in d..k {
            let others = sub(&base, &self.min_contrib[i]);
            let mut best = f64::INFINITY;
            for c in 0..self.cands.len() {
                let lo = add(&others, &self.contrib[i][c]);
                if !self.budget_ok(&lo) {
                    continue;
                }
                let t = self.term_lb(i, c, &lo);
                best = best.min(t);
                if i == d {
                    children.push((t, c));
                }
            }
            lb += best;
        }
        if d < k {
            let first = children.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
            for ch in &mut children {
                ch.0 += lb - first;
            }
        }
        (lb, children)
    }

    fn allocation(&self, assigned: &[usize]) -> Allocation {
        Allocation::from_rows(assigned.iter().map(|&c| self.cands[c]).collect())
    }

    fn evaluate(&self, rho: &Allocation) -> f64 {
        match self.opts.objective {
            Objective::P2 => objective_p2(rho, self.s).total,
            Objective::P3 => objective_p3(rho, self.s),
        }
    }

    fn offer(&mut self, assigned: &[usize]) {
        let rho = self.allocation(assigned);
        if !feasibility(&rho, self.s).all_ok() {
            return;
        }
        let v = self.evaluate(&rho);
        if v < self.incumbent {
            self.incumbent = v;
            self.best = Some(assigned.to_vec());
        }
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.nodes += 1;
        if self.nodes > self.opts.budget {
            return Err(SolveError::BudgetExceeded {
                budget: self.opts.budget,
                enumerated: self.nodes - 1,
            });
        }
        Ok(())
    }

    /// Seeds the incumbent with single-technology allocations refined by
    /// per-task best responses.
    fn seed_incumbent(&mut self) {
        let k = self.s.n_tasks();
        let pure: Vec<usize> = (0..self.cands.len())
            .filter(|&c| self.cands[c].iter().any(|&v| v == 1.0))
            .collect();
        let mut start = None;
        for &c in &pure {
            let a = vec![c; k];
            let before = self.incumbent;
            self.offer(&a);
            if self.incumbent < before {
                start = Some(a);
            }
        }
        let Some(mut cur) = start else { return };
        for _ in 0..20 {
            let mut changed = false;
            for i in 0..k {
                for c in 0..self.cands.len() {
                    let mut trial = cur.clone();
                    trial[i] = c;
                    let before = self.incumbent;
                    self.offer(&trial);
                    if self.incumbent < before {
                        cur = trial;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn dfs(&mut self, assigned: &mut Vec<usize>, sum: Agg) -> Result<(), SolveError> {
        self.tick()?;
        let k = self.s.n_tasks();
        if assigned.len() == k {
            self.offer(assigned);
            return Ok(());
        }
        let d = assigned.len();
        let mut children: Vec<(f64, usize)> = if self.opts.prune {
            let (lb, children) = self.node_bound(assigned, &sum);
            if lb >= self.incumbent - self.tol() {
                return Ok(());
            }
            children
        } else {
            (0..self.cands.len()).map(|c| (0.0, c)).collect()
        };
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (lb, c) in children {
            if self.opts.prune && lb >= self.incumbent - self.tol() {
                break;
            }
            assigned.push(c);
            let r = self.dfs(assigned, add(&sum, &self.contrib[d][c]));
            assigned.pop();
            r?;
        }
        Ok(())
    }
}

/// Exact grid optimum of P2 or P3 over the masked allocation grid.
pub fn oracle_grid_search(s: &ScenarioConfig, opts: OracleOptions) -> Result<SolveResult, SolveError> {
    let t0 = Instant::now();
    let mut search = Search::new(s, opts)?;
    if opts.prune {
        search.seed_incumbent();
    }
    search.dfs(&mut Vec::with_capacity(s.n_tasks()), [0.0; N_AGG])?;
    let Some(best) = search.best.clone() else {
        return Err(SolveError::Infeasible);
    };
    let rho = search.allocation(&best);
    let best_cost: CostBreakdown = objective_p2(&rho, s);
    Ok(SolveResult {
        solver_name: "oracle".to_string(),
        objective_value: search.evaluate(&rho),
        best_cost,
        best_rho: rho,
        trajectory: Vec::new(),
        wall_time: t0.elapsed().as_secs_f64(),
        snapped: None,
        notes: vec![
            format!("grid points per task: {}", search.cands.len()),
            format!("search nodes: {}", search.nodes),
        ],
    })
}
