//! Closed-form delay bounds and offloading-failure probabilities.
//!
//! Every path composes a transport server with a compute server (the on-board
//! processor of the target vehicle, or the VEC pool for C-V2I). After the
//! leftover-service and concatenation steps each bound reduces to
//!
//! ```text
//! ln ε = θ·(A − d·B)        d(ε) = (A − ln ε / θ) / B
//! ```
//!
//! where `A` (Mb) aggregates burstiness and access overhead and `B` (Mbps) is
//! the residual compute rate left to the task. [`bound_coefficients`] returns
//! `(A, B)`; the tight form with the geometric-sum denominators is available
//! through [`curve_params`] and [`tight_failure_prob`].

use thiserror::Error;

use crate::model::{Allocation, DsrcMacParams, ScenarioConfig, TechKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetcalcError {
    #[error("failure probability {0} outside (0, 1]")]
    InvalidEpsilon(f64),
    #[error("geometric sums diverge: xi={xi}, xi_comp={xi_comp}, lambda={lambda}")]
    ConvergenceViolated { xi: f64, xi_comp: f64, lambda: f64 },
}

/// `(A, B)` of one (technology, task) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineBound {
    pub num_a: f64,
    pub den_b: f64,
    pub tech: TechKind,
    pub task_index: usize,
}

impl AffineBound {
    /// Delay bound at failure probability `eps`; infinite when the server is
    /// overloaded (`B ≤ 0`).
    pub fn delay(&self, eps: f64, theta: f64) -> f64 {
        if self.den_b > 0.0 {
            (self.num_a - eps.ln() / theta) / self.den_b
        } else {
            f64::INFINITY
        }
    }

    /// `θ(A − dB)` without the clamp at zero.
    #[inline]
    pub fn unclamped_log_prob(&self, d: f64, theta: f64) -> f64 {
        theta * (self.num_a - d * self.den_b)
    }

    /// `ln ε` at delay `d`, clamped to `ε ≤ 1`; zero for an overloaded server.
    #[inline]
    pub fn log_prob(&self, d: f64, theta: f64) -> f64 {
        if self.den_b > 0.0 {
            self.unclamped_log_prob(d, theta).min(0.0)
        } else {
            0.0
        }
    }
}

/// Envelope parameters of the transport and compute servers of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechCurveParams {
    /// Transport envelope rate; infinite for local processing (no link).
    pub xi: f64,
    pub eta: f64,
    pub xi_comp: f64,
    pub eta_comp: f64,
    /// Own-share burstiness `ρ^h_i·o_i`.
    pub rho_self_o: f64,
}

/// Head-of-line access overhead of DSRC expressed in Mb:
/// `R·t_serv = W_0·(2ℳ)^𝒢 / R^(𝒢−1)`.
pub fn dsrc_access_overhead(mac: &DsrcMacParams, r_dsrc: f64) -> f64 {
    let g = mac.backoff_threshold as i32;
    mac.w0 * (2.0 * mac.collision_prob).powi(g) / r_dsrc.powi(g - 1)
}

fn dsrc_overhead(s: &ScenarioConfig) -> f64 {
    s.dsrc_access_overhead_mb
        .unwrap_or_else(|| dsrc_access_overhead(&s.mac, s.r_dsrc))
}

/// Load seen by a vehicle's on-board processor, `(rate Mbps, burst Mb)`.
///
/// Task `j` contributes with weight `(1 − ρ^v2i_j + (N−1)ρ^local_j)/N`: its
/// offloaded V2V part is spread over the `N` vehicles and its local part is
/// processed by every vehicle for itself.
pub fn on_board_load(rho: &Allocation, s: &ScenarioConfig) -> (f64, f64) {
    let n = f64::from(s.n_vehicles);
    let mut rate = 0.0;
    let mut burst = 0.0;
    for (j, task) in s.tasks.iter().enumerate() {
        let w = (1.0 - rho.get(j, TechKind::Cv2i) + (n - 1.0) * rho.get(j, TechKind::Local)) / n;
        rate += w * task.arrival_rate;
        burst += w * task.burstiness;
    }
    (rate, burst)
}

/// Licensed bandwidth reserved for `tech ∈ {Cv2v, Cv2i}` of task `i`:
/// the C-V2X pool split in proportion to allocated arrival rate.
pub fn reserved_rate(tech: TechKind, i: usize, rho: &Allocation, s: &ScenarioConfig) -> f64 {
    debug_assert!(matches!(tech, TechKind::Cv2v | TechKind::Cv2i));
    let lambda = |j: usize| s.tasks[j].arrival_rate;
    let total = rho.weighted_sum(TechKind::Cv2i, lambda) + rho.weighted_sum(TechKind::Cv2v, lambda);
    if total > 0.0 {
        s.r_cv2x * rho.get(i, tech) * lambda(i) / total
    } else {
        s.r_cv2x / (2 * s.n_tasks()) as f64
    }
}

fn rmmw_term(rho: &Allocation, s: &ScenarioConfig) -> f64 {
    if s.rmmw_control {
        4.0 * s.rts_burstiness * rho.weighted_sum(TechKind::Cv2v, |_| 1.0)
    } else {
        0.0
    }
}

/// `(A, B)` of the simplified bound of `tech` for task `i`.
pub fn bound_coefficients(
    tech: TechKind,
    i: usize,
    rho: &Allocation,
    s: &ScenarioConfig,
) -> AffineBound {
    let task = &s.tasks[i];
    let (num_a, den_b) = match tech {
        TechKind::Cv2i => {
            let burst = rho.weighted_sum(TechKind::Cv2i, |j| s.tasks[j].burstiness);
            let others: f64 = rho.weighted_sum(TechKind::Cv2i, |j| s.tasks[j].arrival_rate)
                - rho.get(i, TechKind::Cv2i) * task.arrival_rate;
            (burst, s.theta_epc - others)
        }
        TechKind::Local => {
            let (rate, burst) = on_board_load(rho, s);
            (burst, s.theta_veh - rate)
        }
        TechKind::Dsrc | TechKind::Cv2v | TechKind::Cmmw => {
            let (rate, burst) = on_board_load(rho, s);
            let extra = match tech {
                TechKind::Dsrc => dsrc_overhead(s),
                TechKind::Cmmw => {
                    2.0 * rho.weighted_sum(TechKind::Dsrc, |j| s.tasks[j].burstiness)
                }
                _ => rmmw_term(rho, s),
            };
            (
                burst + extra,
                s.theta_veh - rate + rho.get(i, tech) * task.arrival_rate,
            )
        }
    };
    AffineBound {
        num_a,
        den_b,
        tech,
        task_index: i,
    }
}

fn check_eps(eps: f64) -> Result<(), NetcalcError> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(NetcalcError::InvalidEpsilon(eps))
    }
}

/// Delay (s) that task `i` meets over `tech` with probability `1 − eps`.
/// Infinite when the compute server is overloaded.
pub fn delay_bound(
    tech: TechKind,
    i: usize,
    rho: &Allocation,
    s: &ScenarioConfig,
    eps: f64,
) -> Result<f64, NetcalcError> {
    check_eps(eps)?;
    Ok(bound_coefficients(tech, i, rho, s).delay(eps, s.theta))
}

/// `ln ε` for meeting delay `d`, clamped at 0.
pub fn failure_log_prob(tech: TechKind, i: usize, rho: &Allocation, s: &ScenarioConfig, d: f64) -> f64 {
    bound_coefficients(tech, i, rho, s).log_prob(d, s.theta)
}

/// Affine `θ(A − dB)` with neither clamp nor overload handling.
pub fn unclamped_log_prob(
    tech: TechKind,
    i: usize,
    rho: &Allocation,
    s: &ScenarioConfig,
    d: f64,
) -> f64 {
    bound_coefficients(tech, i, rho, s).unclamped_log_prob(d, s.theta)
}

pub fn curve_params(tech: TechKind, i: usize, rho: &Allocation, s: &ScenarioConfig) -> TechCurveParams {
    let task = &s.tasks[i];
    let rho_self_o = rho.get(i, tech) * task.burstiness;
    if tech == TechKind::Cv2i {
        let eta_comp = rho.weighted_sum(TechKind::Cv2i, |j| s.tasks[j].burstiness) - rho_self_o;
        let xi_comp = s.theta_epc
            - (rho.weighted_sum(TechKind::Cv2i, |j| s.tasks[j].arrival_rate)
                - rho.get(i, TechKind::Cv2i) * task.arrival_rate);
        return TechCurveParams {
            xi: reserved_rate(TechKind::Cv2i, i, rho, s),
            eta: 0.0,
            xi_comp,
            eta_comp,
            rho_self_o,
        };
    }

    let (rate, burst) = on_board_load(rho, s);
    let self_rate = if tech == TechKind::Local {
        0.0
    } else {
        rho.get(i, tech) * task.arrival_rate
    };
    let xi_comp = s.theta_veh - rate + self_rate;
    let eta_comp = burst - rho_self_o;
    let (xi, eta) = match tech {
        TechKind::Dsrc => (s.r_dsrc, dsrc_overhead(s)),
        TechKind::Cv2v => (reserved_rate(TechKind::Cv2v, i, rho, s), rmmw_term(rho, s)),
        TechKind::Cmmw => {
            let volume = rho.weighted_sum(TechKind::Dsrc, |j| s.tasks[j].volume(s.horizon));
            let burst = rho.weighted_sum(TechKind::Dsrc, |j| s.tasks[j].burstiness);
            (s.r_dsrc - 2.0 * volume, 2.0 * burst)
        }
        TechKind::Local => (f64::INFINITY, 0.0),
        TechKind::Cv2i => unreachable!(),
    };
    TechCurveParams {
        xi,
        eta,
        xi_comp,
        eta_comp,
        rho_self_o,
    }
}

/// `ln(1 − e^{−x})` for `x > 0`.
fn ln_one_minus_exp_neg(x: f64) -> f64 {
    (-(-x).exp_m1()).ln()
}

/// Logarithm of the tight failure probability (before the clamp at 1).
pub fn tight_failure_log_prob(
    tech: TechKind,
    i: usize,
    rho: &Allocation,
    s: &ScenarioConfig,
    d: f64,
) -> Result<f64, NetcalcError> {
    let p = curve_params(tech, i, rho, s);
    let lambda = s.tasks[i].arrival_rate;
    if !(p.xi > p.xi_comp && p.xi_comp > lambda) {
        return Err(NetcalcError::ConvergenceViolated {
            xi: p.xi,
            xi_comp: p.xi_comp,
            lambda,
        });
    }
    let theta = s.theta;
    let numerator = theta * (p.rho_self_o + p.eta_comp + p.eta) - theta * p.xi_comp * d;
    let u = ln_one_minus_exp_neg(theta * (p.xi - p.xi_comp))
        + ln_one_minus_exp_neg(theta * (p.xi_comp - lambda));
    Ok(numerator - u)
}

/// Failure probability including the geometric-sum denominators, clamped to 1.
pub fn tight_failure_prob(
    tech: TechKind,
    i: usize,
    rho: &Allocation,
    s: &ScenarioConfig,
    d: f64,
) -> Result<f64, NetcalcError> {
    Ok(tight_failure_log_prob(tech, i, rho, s, d)?.exp().min(1.0))
}
