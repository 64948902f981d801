//! Steepest-ascent hill climbing on the learner reward.

use std::time::Instant;

use crate::cost::objective_p2;
use crate::model::ScenarioConfig;

use super::mdp::{apply_action, enumerate_actions, MdpState};
use super::{SolveError, SolveResult};

/// From the all-local start, repeatedly takes the feasible action with the
/// largest reward. The first maximizer in (tech, task, delta) order wins a
/// tie. Stops when no action strictly improves or after `max_steps` moves.
pub fn run_greedy(s: &ScenarioConfig, max_steps: usize) -> Result<SolveResult, SolveError> {
    let t0 = Instant::now();
    let mut state = MdpState::initial(s);
    let mut cost = objective_p2(state.rho(), s).total;
    let mut trajectory = Vec::new();

    for _ in 0..max_steps {
        let mut best: Option<(f64, MdpState)> = None;
        for a in enumerate_actions(&state, s) {
            let next = apply_action(&state, a, s)?;
            let c = objective_p2(next.rho(), s).total;
            if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                best = Some((c, next));
            }
        }
        match best {
            Some((c, next)) if c < cost => {
                cost = c;
                state = next;
                trajectory.push(cost);
            }
            _ => break,
        }
    }

    let rho = state.into_rho();
    let best_cost = objective_p2(&rho, s);
    Ok(SolveResult {
        solver_name: "greedy".to_string(),
        best_rho: rho,
        best_cost,
        objective_value: best_cost.total,
        trajectory,
        wall_time: t0.elapsed().as_secs_f64(),
        snapped: None,
        notes: Vec::new(),
    })
}
