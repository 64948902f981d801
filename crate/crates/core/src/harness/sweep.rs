//! Per-technology bound sweeps over one task parameter.
//!
//! Every task gets the swept value and the traffic of each task is split
//! equally across the masked technologies, so curves of different
//! technologies see the same background load. Results are for task 0.

use std::str::FromStr;

use serde::Deserialize;

use crate::model::{Allocation, ScenarioConfig, TechKind};
use crate::netcalc::{delay_bound, failure_log_prob};

use super::HarnessError;

/// Failure probability used for the delay columns.
pub const SWEEP_EPSILON: f64 = 0.01;
/// Burstiness held fixed during an arrival-rate sweep, Mb.
pub const FIXED_BURSTINESS: f64 = 100.0;
/// Arrival rate held fixed during a burstiness sweep, Mbps.
pub const FIXED_RATE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Lambda,
    Burstiness,
    TMax,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Lambda => "lambda",
            SweepVar::Burstiness => "burstiness",
            SweepVar::TMax => "t_max",
        }
    }

    /// Name of the reported quantity.
    pub fn metric(self) -> &'static str {
        match self {
            SweepVar::TMax => "ln_eps",
            _ => "delay_bound",
        }
    }
}

impl FromStr for SweepVar {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lambda" => Ok(SweepVar::Lambda),
            "burstiness" | "o" => Ok(SweepVar::Burstiness),
            "t_max" => Ok(SweepVar::TMax),
            _ => Err(HarnessError::Spec(format!("unknown sweep variable `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepSpec {
    /// Sweep points `from, from + step, …` up to `to` inclusive.
    pub fn values(&self) -> Result<Vec<f64>, HarnessError> {
        if !(self.step > 0.0) || !self.from.is_finite() || !self.to.is_finite() || self.to < self.from {
            return Err(HarnessError::Spec(
                "sweep needs finite from <= to and step > 0".into(),
            ));
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.from + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub tech: TechKind,
    pub result: f64,
}

/// Scenario with every task set to the sweep point.
pub fn swept_scenario(s: &ScenarioConfig, var: SweepVar, value: f64) -> ScenarioConfig {
    let mut out = s.clone();
    for t in &mut out.tasks {
        match var {
            SweepVar::Lambda => {
                t.arrival_rate = value;
                t.burstiness = FIXED_BURSTINESS;
            }
            SweepVar::Burstiness => {
                t.arrival_rate = FIXED_RATE;
                t.burstiness = value;
            }
            SweepVar::TMax => t.t_max = value,
        }
    }
    out
}

pub fn run_sweep(s: &ScenarioConfig, sweep: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    let rho = Allocation::uniform(s.n_tasks(), s.tech_mask);
    let mut rows = Vec::new();
    for value in sweep.values()? {
        let sv = swept_scenario(s, sweep.var, value);
        for tech in s.tech_mask.iter() {
            let result = match sweep.var {
                SweepVar::TMax => failure_log_prob(tech, 0, &rho, &sv, sv.tasks[0].t_max),
                _ => delay_bound(tech, 0, &rho, &sv, SWEEP_EPSILON)
                    .expect("fixed epsilon is valid"),
            };
            rows.push(SweepRow { value, tech, result });
        }
    }
    Ok(rows)
}
