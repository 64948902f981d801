//! Offloading-selection MDP on the 0.01 allocation grid.
//!
//! States hold integer percentages so that row sums stay exactly 100. An
//! action moves one (technology, task) share by ±1 or ±10 points and spreads
//! the opposite change over the other masked technologies in equal parts of
//! `delta/(n−1)`, each rounded down to the grid and clamped to [0, 100]. The
//! rounding residual lands on `Local`.

use std::fmt;

use crate::cost::feasibility;
use crate::model::{Allocation, ScenarioConfig, TechKind, N_TECH};

use super::SolveError;

/// Share of one task on each technology, in percent.
pub type PercentRow = [u8; N_TECH];

#[derive(Debug, Clone, PartialEq)]
pub struct MdpState {
    percent: Vec<PercentRow>,
    rho: Allocation,
    /// Residual licensed and DSRC budget over the horizon, Mb.
    reserved: (f64, f64),
}

impl MdpState {
    pub fn from_percent(percent: Vec<PercentRow>, s: &ScenarioConfig) -> Self {
        let rho = Allocation::from_percent(&percent);
        let f = feasibility(&rho, s);
        MdpState {
            percent,
            rho,
            reserved: (f.c2_limit - f.c2_usage, f.c3_limit - f.c3_usage),
        }
    }

    /// All traffic processed locally.
    pub fn initial(s: &ScenarioConfig) -> Self {
        let mut row = [0u8; N_TECH];
        row[TechKind::Local.index()] = 100;
        Self::from_percent(vec![row; s.n_tasks()], s)
    }

    pub fn rho(&self) -> &Allocation {
        &self.rho
    }

    pub fn percent(&self) -> &[PercentRow] {
        &self.percent
    }

    #[inline]
    pub fn share(&self, task: usize, tech: TechKind) -> u8 {
        self.percent[task][tech.index()]
    }

    /// `(R^cv2x residual, R^dsrc residual)` in Mb.
    pub fn reserved(&self) -> (f64, f64) {
        self.reserved
    }

    pub fn into_rho(self) -> Allocation {
        self.rho
    }
}

/// Step applied to the selected share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Delta {
    PlusTenth,
    PlusHundredth,
    MinusTenth,
    MinusHundredth,
}

impl Delta {
    pub const ALL: [Delta; 4] = [
        Delta::PlusTenth,
        Delta::PlusHundredth,
        Delta::MinusTenth,
        Delta::MinusHundredth,
    ];

    /// Step in percentage points.
    pub fn points(self) -> i32 {
        match self {
            Delta::PlusTenth => 10,
            Delta::PlusHundredth => 1,
            Delta::MinusTenth => -10,
            Delta::MinusHundredth => -1,
        }
    }

    pub fn value(self) -> f64 {
        f64::from(self.points()) / 100.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MdpAction {
    pub tech: TechKind,
    pub task: usize,
    pub delta: Delta,
}

impl fmt::Display for MdpAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] {:+.2}", self.tech, self.task, self.delta.value())
    }
}

/// New row for `action`, or `None` when the move is out of range, leaves the
/// row unchanged, or breaks C2/C3.
fn next_row(state: &MdpState, action: MdpAction, s: &ScenarioConfig) -> Option<PercentRow> {
    let mask = s.tech_mask;
    let n = mask.len() as i32;
    if n < 2 || !mask.contains(action.tech) || action.task >= state.percent.len() {
        return None;
    }
    let old = state.percent[action.task];
    let delta = action.delta.points();
    let chosen = i32::from(old[action.tech.index()]) + delta;
    if !(0..=100).contains(&chosen) {
        return None;
    }

    let mut row = [0u8; N_TECH];
    let mut non_local = 0i32;
    for t in mask.iter().filter(|t| *t != TechKind::Local) {
        let v = if t == action.tech {
            chosen
        } else {
            (i32::from(old[t.index()]) * (n - 1) - delta)
                .div_euclid(n - 1)
                .clamp(0, 100)
        };
        row[t.index()] = v as u8;
        non_local += v;
    }
    let local = 100 - non_local;
    if !(0..=100).contains(&local) {
        return None;
    }
    row[TechKind::Local.index()] = local as u8;
    if row == old {
        return None;
    }

    // C2/C3 on the updated usage.
    let task = &s.tasks[action.task];
    let vol = task.volume(s.horizon);
    let pct = |r: &PercentRow, t: TechKind| f64::from(r[t.index()]) / 100.0;
    let licensed = |r: &PercentRow| (pct(r, TechKind::Cv2i) + pct(r, TechKind::Cv2v)) * vol;
    let dsrc = |r: &PercentRow| pct(r, TechKind::Dsrc) * vol;
    let (res_cv2x, res_dsrc) = state.reserved;
    if licensed(&row) - licensed(&old) > res_cv2x + 1e-9 {
        return None;
    }
    if dsrc(&row) - dsrc(&old) > res_dsrc + 1e-9 {
        return None;
    }
    Some(row)
}

/// Legal actions of one technology, ordered by (task, delta).
pub fn enumerate_actions_for(state: &MdpState, s: &ScenarioConfig, tech: TechKind) -> Vec<MdpAction> {
    let mut out = Vec::new();
    for task in 0..state.percent.len() {
        for delta in Delta::ALL {
            let a = MdpAction { tech, task, delta };
            if next_row(state, a, s).is_some() {
                out.push(a);
            }
        }
    }
    out
}

/// Legal actions over every masked technology, ordered by (tech, task, delta).
pub fn enumerate_actions(state: &MdpState, s: &ScenarioConfig) -> Vec<MdpAction> {
    s.tech_mask
        .iter()
        .flat_map(|t| enumerate_actions_for(state, s, t))
        .collect()
}

/// Share (percent) that `action` would leave on its own (tech, task) cell.
pub fn target_share(state: &MdpState, action: MdpAction) -> usize {
    (i32::from(state.share(action.task, action.tech)) + action.delta.points()) as usize
}

pub fn apply_action(state: &MdpState, action: MdpAction, s: &ScenarioConfig) -> Result<MdpState, SolveError> {
    let row = next_row(state, action, s).ok_or(SolveError::IllegalAction(action))?;
    let mut percent = state.percent.clone();
    percent[action.task] = row;
    Ok(MdpState::from_percent(percent, s))
}
