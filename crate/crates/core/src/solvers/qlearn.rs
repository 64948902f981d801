//! Tabular Q-learning over the offloading MDP, federated across technology
//! learners or run as a single centralized learner.
//!
//! A table entry `Q[tech, task, k]` scores moving the (tech, task) share to
//! `k` percent. Each federated learner picks among the increments of its own
//! technology and writes only its own slice; aggregation then folds every
//! local table into the consensus table, which is broadcast back.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::objective_p2;
use crate::model::{ScenarioConfig, TechKind, N_TECH};

use super::mdp::{apply_action, enumerate_actions, enumerate_actions_for, target_share, MdpAction, MdpState};
use super::{SolveError, SolveResult};

/// Share levels per (tech, task): 0..=100 percent.
pub const N_RHO: usize = 101;

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_tasks: usize,
    data: Vec<f64>,
}

impl QTable {
    pub fn zeros(n_tasks: usize) -> Self {
        QTable {
            n_tasks,
            data: vec![0.0; N_TECH * n_tasks * N_RHO],
        }
    }

    /// Table of the given shape with every entry equal to `v`.
    pub fn filled(n_tasks: usize, v: f64) -> Self {
        QTable {
            n_tasks,
            data: vec![v; N_TECH * n_tasks * N_RHO],
        }
    }

    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    #[inline]
    fn idx(&self, tech: TechKind, task: usize, k: usize) -> usize {
        debug_assert!(task < self.n_tasks && k < N_RHO);
        (tech.index() * self.n_tasks + task) * N_RHO + k
    }

    #[inline]
    pub fn get(&self, tech: TechKind, task: usize, k: usize) -> f64 {
        self.data[self.idx(tech, task, k)]
    }

    #[inline]
    pub fn set(&mut self, tech: TechKind, task: usize, k: usize, v: f64) {
        let i = self.idx(tech, task, k);
        self.data[i] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Score of `a` taken in `state`.
    #[inline]
    fn action_value(&self, state: &MdpState, a: MdpAction) -> f64 {
        self.get(a.tech, a.task, target_share(state, a))
    }

    fn max_value(&self, state: &MdpState, actions: &[MdpAction]) -> f64 {
        actions
            .iter()
            .map(|a| self.action_value(state, *a))
            .reduce(f64::max)
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Sync,
    Async,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub p_exploit: f64,
    pub n_rounds: usize,
    pub seed: u64,
    pub aggregation: Aggregation,
    /// Bootstrap on the successor state instead of the state the action was
    /// taken from.
    pub standard_bootstrap: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 0.1,
            gamma: 0.9,
            p_exploit: 0.9,
            n_rounds: 200,
            seed: 0,
            aggregation: Aggregation::Sync,
            standard_bootstrap: false,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::InvalidHyperparams(m.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.p_exploit) {
            return bad("p_exploit must lie in [0, 1]");
        }
        Ok(())
    }
}

/// One temporal-difference step: `α(r + γ·m) + (1 − α)·q`.
#[inline]
pub fn q_update_value(q_prev: f64, reward: f64, max_bootstrap: f64, alpha: f64, gamma: f64) -> f64 {
    alpha * (reward + gamma * max_bootstrap) + (1.0 - alpha) * q_prev
}

/// Updates the entry for `action` taken in `prev` (which led to `next`).
/// `owner` restricts the bootstrap max to one technology's actions; `None`
/// means the learner owns all technologies. Returns the new entry.
#[allow(clippy::too_many_arguments)]
pub fn q_update(
    q: &mut QTable,
    owner: Option<TechKind>,
    prev: &MdpState,
    action: MdpAction,
    reward: f64,
    next: &MdpState,
    s: &ScenarioConfig,
    h: &Hyperparams,
) -> f64 {
    let boot_state = if h.standard_bootstrap { next } else { prev };
    let actions = match owner {
        Some(t) => enumerate_actions_for(boot_state, s, t),
        None => enumerate_actions(boot_state, s),
    };
    let m = q.max_value(boot_state, &actions);
    let k = target_share(prev, action);
    let v = q_update_value(q.get(action.tech, action.task, k), reward, m, h.alpha, h.gamma);
    q.set(action.tech, action.task, k, v);
    v
}

/// Consensus step: `[(n − 1)·CQ + mean(locals)] / n`, elementwise.
pub fn aggregate_consensus(cq_prev: &QTable, locals: &[QTable], n_update: usize) -> Result<QTable, SolveError> {
    if n_update == 0 || locals.is_empty() {
        return Err(SolveError::EmptyConsensus(n_update));
    }
    if locals.iter().any(|l| l.data.len() != cq_prev.data.len()) {
        return Err(SolveError::ShapeMismatch);
    }
    let n = n_update as f64;
    let nf = locals.len() as f64;
    let mut out = cq_prev.clone();
    for (j, v) in out.data.iter_mut().enumerate() {
        let mut sum = 0.0;
        for l in locals {
            sum += l.data[j];
        }
        *v = ((n - 1.0) * *v + sum / nf) / n;
    }
    Ok(out)
}

/// SplitMix64 finalizer, used to derive independent RNG streams.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn choose(rng: &mut ChaCha8Rng, q: &QTable, state: &MdpState, actions: &[MdpAction], p_exploit: f64) -> MdpAction {
    if rng.gen::<f64>() < p_exploit {
        let best = q.max_value(state, actions);
        let ties: Vec<MdpAction> = actions
            .iter()
            .copied()
            .filter(|a| q.action_value(state, *a) == best)
            .collect();
        ties[rng.gen_range(0..ties.len())]
    } else {
        actions[rng.gen_range(0..actions.len())]
    }
}

struct Best {
    state: MdpState,
    total: f64,
}

impl Best {
    fn offer(&mut self, st: &MdpState, total: f64) {
        if total < self.total {
            self.total = total;
            self.state = st.clone();
        }
    }
}

fn finish(name: &str, best: Best, trajectory: Vec<f64>, s: &ScenarioConfig, t0: Instant) -> SolveResult {
    let rho = best.state.into_rho();
    let cost = objective_p2(&rho, s);
    SolveResult {
        solver_name: name.to_string(),
        best_rho: rho,
        best_cost: cost,
        objective_value: cost.total,
        trajectory,
        wall_time: t0.elapsed().as_secs_f64(),
        snapped: None,
        notes: Vec::new(),
    }
}

/// Federated Q-learning with one learner per masked technology.
pub fn run_fql(s: &ScenarioConfig, h: &Hyperparams) -> Result<SolveResult, SolveError> {
    h.validate()?;
    let t0 = Instant::now();
    let techs: Vec<TechKind> = s.tech_mask.iter().collect();
    let k = s.n_tasks();
    let mut rngs: Vec<ChaCha8Rng> = techs
        .iter()
        .map(|t| ChaCha8Rng::seed_from_u64(mix_seed(h.seed, t.index() as u64)))
        .collect();
    let mut cq = QTable::zeros(k);
    let mut locals = vec![cq.clone(); techs.len()];

    let mut state = MdpState::initial(s);
    let mut best = Best {
        total: objective_p2(state.rho(), s).total,
        state: state.clone(),
    };
    let mut trajectory = Vec::with_capacity(h.n_rounds);

    for _ in 0..h.n_rounds {
        let mut n_upd = 0;
        for (li, &tech) in techs.iter().enumerate() {
            let actions = enumerate_actions_for(&state, s, tech);
            if actions.is_empty() {
                continue;
            }
            let a = choose(&mut rngs[li], &locals[li], &state, &actions, h.p_exploit);
            let next = apply_action(&state, a, s)?;
            let cost = objective_p2(next.rho(), s).total;
            q_update(&mut locals[li], Some(tech), &state, a, -cost, &next, s, h);
            best.offer(&next, cost);
            state = next;

            if h.aggregation == Aggregation::Async {
                n_upd += 1;
                cq = aggregate_consensus(&cq, &locals, n_upd)?;
                locals.iter_mut().for_each(|l| l.clone_from(&cq));
            }
        }
        if h.aggregation == Aggregation::Sync {
            cq = aggregate_consensus(&cq, &locals, techs.len())?;
            locals.iter_mut().for_each(|l| l.clone_from(&cq));
        }
        trajectory.push(best.total);
    }

    let name = match h.aggregation {
        Aggregation::Sync => "sync-fql",
        Aggregation::Async => "async-fql",
    };
    Ok(finish(name, best, trajectory, s, t0))
}

/// Centralized Q-learning: one table and one learner choosing among every
/// technology's increments. It takes as many steps per round as the
/// federated variant (one per masked technology) and never aggregates.
pub fn run_qlearning(s: &ScenarioConfig, h: &Hyperparams) -> Result<SolveResult, SolveError> {
    h.validate()?;
    let t0 = Instant::now();
    let steps = s.tech_mask.len();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(h.seed, N_TECH as u64));
    let mut q = QTable::zeros(s.n_tasks());

    let mut state = MdpState::initial(s);
    let mut best = Best {
        total: objective_p2(state.rho(), s).total,
        state: state.clone(),
    };
    let mut trajectory = Vec::with_capacity(h.n_rounds);

    for _ in 0..h.n_rounds {
        for _ in 0..steps {
            let actions = enumerate_actions(&state, s);
            if actions.is_empty() {
                break;
            }
            let a = choose(&mut rng, &q, &state, &actions, h.p_exploit);
            let next = apply_action(&state, a, s)?;
            let cost = objective_p2(next.rho(), s).total;
            q_update(&mut q, None, &state, a, -cost, &next, s, h);
            best.offer(&next, cost);
            state = next;
        }
        trajectory.push(best.total);
    }
    Ok(finish("ql", best, trajectory, s, t0))
}
