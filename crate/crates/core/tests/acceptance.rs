//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vec_offload::cost::{feasibility, objective_p3};
use vec_offload::harness::{run_experiment, run_sweep, ExperimentSpec, SolverKind, SweepSpec, SweepVar};
use vec_offload::model::{default_scenario, Allocation, Framework, ScenarioConfig, TechKind, TechMask};
use vec_offload::netcalc::{curve_params, delay_bound, failure_log_prob, on_board_load};
use vec_offload::solvers::{
    aggregate_consensus, oracle_grid_search, run_fql, run_greedy, run_qlearning, run_relaxation,
    qlearn::q_update_value, Aggregation, Hyperparams, Objective, OracleOptions, QTable,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t0: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let el = t0.elapsed();
    check(el < limit, format!("{what} took {el:?}, limit {limit:?}"))
}

// ---------------------------------------------------------------------------
// Closed forms transcribed term by term, sharing nothing with the library
// beyond the scenario and allocation containers.
// ---------------------------------------------------------------------------

/// `(numerator, denominator)` of the delay bound: `d = (num − ln ε/θ)/den`.
fn closed_form(tech: TechKind, i: usize, rho: &Allocation, s: &ScenarioConfig) -> (f64, f64) {
    let n = f64::from(s.n_vehicles);
    let k = s.tasks.len();
    let r = |j: usize, t: TechKind| rho.row(j)[t as usize];
    let lam = |j: usize| s.tasks[j].arrival_rate;
    let o = |j: usize| s.tasks[j].burstiness;
    let mut sum_wo = 0.0;
    let mut sum_wl = 0.0;
    for j in 0..k {
        let w = 1.0 - r(j, TechKind::Cv2i) + (n - 1.0) * r(j, TechKind::Local);
        sum_wo += w * o(j) / n;
        sum_wl += w * lam(j) / n;
    }
    match tech {
        TechKind::Local => (sum_wo, s.theta_veh - sum_wl),
        TechKind::Dsrc => {
            let g = f64::from(s.mac.backoff_threshold);
            let access = s.dsrc_access_overhead_mb.unwrap_or_else(|| {
                s.mac.w0 * (2.0 * s.mac.collision_prob).powf(g) / s.r_dsrc.powf(g - 1.0)
            });
            (sum_wo + access, s.theta_veh - sum_wl + r(i, tech) * lam(i))
        }
        TechKind::Cmmw => {
            let dsrc_o: f64 = (0..k).map(|j| r(j, TechKind::Dsrc) * o(j)).sum();
            (2.0 * dsrc_o + sum_wo, s.theta_veh - sum_wl + r(i, tech) * lam(i))
        }
        TechKind::Cv2v => {
            // Reservation-controlled mmWave occupies this slot when enabled.
            let ctrl = if s.rmmw_control {
                4.0 * (0..k).map(|j| r(j, TechKind::Cv2v) * s.rts_burstiness).sum::<f64>()
            } else {
                0.0
            };
            (ctrl + sum_wo, s.theta_veh - sum_wl + r(i, tech) * lam(i))
        }
        TechKind::Cv2i => {
            let num: f64 = (0..k).map(|j| r(j, TechKind::Cv2i) * o(j)).sum();
            let others: f64 = (0..k).filter(|&j| j != i).map(|j| r(j, TechKind::Cv2i) * lam(j)).sum();
            (num, s.theta_epc - others)
        }
    }
}

fn ref_delay(num: f64, den: f64, ln_eps: f64, theta: f64) -> f64 {
    if den <= 0.0 {
        f64::INFINITY
    } else {
        (num - ln_eps / theta) / den
    }
}

fn ref_log_prob(num: f64, den: f64, d: f64, theta: f64) -> f64 {
    if den <= 0.0 {
        0.0
    } else {
        (theta * (num - d * den)).min(0.0)
    }
}

fn c1_formula_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut instances = 0;
    let mut comparisons = 0;
    let mut worst = 0.0f64;
    while instances < 1000 {
        let s = common::random_scenario(&mut rng);
        let rho = common::random_allocation(&mut rng, s.n_tasks(), s.tech_mask);
        // Skip instances whose denominator sits within rounding of zero.
        let near_zero = (0..s.n_tasks()).any(|i| {
            s.tech_mask.iter().any(|t| {
                let (_, den) = closed_form(t, i, &rho, &s);
                den.abs() < 1e-6 * s.theta_epc
            })
        });
        if near_zero {
            continue;
        }
        instances += 1;
        let eps = (-rng.gen_range(0.0..20.0f64)).exp();
        for i in 0..s.n_tasks() {
            let d = rng.gen_range(0.0..3.0);
            for t in s.tech_mask.iter() {
                let (num, den) = closed_form(t, i, &rho, &s);
                // Second path: through the curve parameters.
                let p = curve_params(t, i, &rho, &s);
                let num_b = p.rho_self_o + p.eta_comp + p.eta;
                let den_b = p.xi_comp;
                let scale = num.abs() + d * den.abs() + 1.0;
                check(
                    (num - num_b).abs() <= 1e-9 * scale && (den - den_b).abs() <= 1e-9 * den.abs(),
                    format!("curve parameters disagree for {t} task {i}"),
                )?;

                let want = ref_delay(num, den, eps.ln(), s.theta);
                let got = delay_bound(t, i, &rho, &s, eps).map_err(|e| e.to_string())?;
                let rel = if want.is_infinite() {
                    if got == want { 0.0 } else { f64::INFINITY }
                } else {
                    (got - want).abs() / want.abs().max(1e-300)
                };
                worst = worst.max(rel);
                check(rel <= 1e-9, format!("delay {t} task {i}: {got} vs {want}"))?;

                let want = ref_log_prob(num, den, d, s.theta);
                let got = failure_log_prob(t, i, &rho, &s, d);
                let err = (got - want).abs() / (s.theta * scale);
                worst = worst.max(err);
                check(err <= 1e-9, format!("ln eps {t} task {i}: {got} vs {want}"))?;
                comparisons += 2;
            }
        }
    }
    within(t0, Duration::from_secs(5), "formula oracle")?;
    Ok(format!(
        "{instances} instances, {comparisons} comparisons, worst relative error {worst:.2e}"
    ))
}

fn c2_inversion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut checked = 0;
    let mut allocations = 0;
    let mut worst = 0.0f64;
    while allocations < 100 {
        let s = common::random_scenario(&mut rng);
        let rho = common::random_allocation(&mut rng, s.n_tasks(), s.tech_mask);
        let stable = (0..s.n_tasks()).all(|i| s.tech_mask.iter().all(|t| closed_form(t, i, &rho, &s).1 > 0.0));
        if !stable || !feasibility(&rho, &s).c1_ok {
            continue;
        }
        allocations += 1;
        for eps in [0.5, 0.1, 0.01, 1e-6] {
            for i in 0..s.n_tasks() {
                for t in s.tech_mask.iter() {
                    let d = delay_bound(t, i, &rho, &s, eps).unwrap();
                    let back = failure_log_prob(t, i, &rho, &s, d);
                    let err = (back - eps.ln()).abs();
                    worst = worst.max(err);
                    check(err <= 1e-9, format!("{t} task {i} eps {eps}: {back}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} round trips over {allocations} allocations, worst {worst:.2e}"))
}

fn column(rows: &[vec_offload::harness::SweepRow], t: TechKind) -> Vec<(f64, f64)> {
    rows.iter().filter(|r| r.tech == t).map(|r| (r.value, r.result)).collect()
}

fn c3_monotonicity() -> Outcome {
    let t0 = Instant::now();
    let s = default_scenario("default").unwrap();
    let on_board = [TechKind::Dsrc, TechKind::Cv2v, TechKind::Cmmw, TechKind::Local];

    let lam = SweepSpec { var: SweepVar::Lambda, from: 5.0, to: 800.0, step: 5.0 };
    let rows = run_sweep(&s, &lam).map_err(|e| e.to_string())?;
    let uniform = Allocation::uniform(s.n_tasks(), s.tech_mask);
    let mut saturated = 0;
    for t in s.tech_mask.iter() {
        let col = column(&rows, t);
        check(col.windows(2).all(|w| w[1].1 >= w[0].1), format!("lambda column {t} decreases"))?;
    }
    for (v, d) in column(&rows, TechKind::Local) {
        let sv = vec_offload::harness::sweep::swept_scenario(&s, SweepVar::Lambda, v);
        let load = on_board_load(&uniform, &sv).0;
        check(
            (load >= s.theta_veh) == d.is_infinite(),
            format!("local bound at lambda {v}: load {load}, delay {d}"),
        )?;
        saturated += usize::from(d.is_infinite());
    }
    check(saturated > 0, "sweep never saturates the on-board processor")?;

    let burst = SweepSpec { var: SweepVar::Burstiness, from: 0.0, to: 1000.0, step: 10.0 };
    let rows = run_sweep(&s, &burst).map_err(|e| e.to_string())?;
    let mut slopes = Vec::new();
    for t in s.tech_mask.iter() {
        let col = column(&rows, t);
        check(col.windows(2).all(|w| w[1].1 >= w[0].1), format!("burstiness column {t} decreases"))?;
        let (first, last) = (col[0], col[col.len() - 1]);
        slopes.push((t, (last.1 - first.1) / (last.0 - first.0)));
    }
    let cmmw = slopes.iter().find(|x| x.0 == TechKind::Cmmw).unwrap().1;
    check(
        slopes.iter().filter(|x| on_board.contains(&x.0) && x.0 != TechKind::Cmmw).all(|x| x.1 < cmmw),
        format!("CMMW is not the steepest on-board column: {slopes:?}"),
    )?;

    let tmax = SweepSpec { var: SweepVar::TMax, from: 0.0, to: 5.0, step: 0.05 };
    let rows = run_sweep(&s, &tmax).map_err(|e| e.to_string())?;
    for t in s.tech_mask.iter() {
        let col = column(&rows, t);
        check(col.windows(2).all(|w| w[1].1 <= w[0].1), format!("t_max column {t} increases"))?;
    }
    within(t0, Duration::from_secs(1), "sweeps")?;
    Ok(format!("{saturated} saturated lambda points, CMMW slope {cmmw:.4} s/Mb"))
}

fn c4_rmmw_coincidence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut s = default_scenario("default").unwrap();
    s.rts_burstiness = 0.0;
    let reserved = s.with_mask(TechMask::from_techs(&[TechKind::Cv2i, TechKind::Cv2v]), true);
    let plain = s.with_mask(TechMask::from_techs(&[TechKind::Cv2i, TechKind::Cv2v]), false);
    for _ in 0..100 {
        let rho = common::random_allocation(&mut rng, s.n_tasks(), reserved.tech_mask);
        let eps = rng.gen_range(1e-9..1.0);
        for i in 0..s.n_tasks() {
            let d = rng.gen_range(0.0..5.0);
            let a = delay_bound(TechKind::Cv2v, i, &rho, &reserved, eps).unwrap();
            let b = delay_bound(TechKind::Cv2v, i, &rho, &plain, eps).unwrap();
            let la = failure_log_prob(TechKind::Cv2v, i, &rho, &reserved, d);
            let lb = failure_log_prob(TechKind::Cv2v, i, &rho, &plain, d);
            check(
                a.to_bits() == b.to_bits() && la.to_bits() == lb.to_bits(),
                format!("task {i}: {a} vs {b}, {la} vs {lb}"),
            )?;
        }
    }
    Ok("100 allocations bitwise equal".into())
}

fn c5_framework_ranking() -> Outcome {
    let t0 = Instant::now();
    let mut table = String::new();
    let mut failures = Vec::new();
    for (scenario, expected) in [("light", Framework::Cv2xRmmw), ("heavy", Framework::Cv2xDsrc)] {
        let base = default_scenario(scenario).unwrap();
        let mut values = Vec::new();
        for fw in Framework::ALL {
            let r = oracle_grid_search(&fw.apply(&base), OracleOptions::new(0.05, Objective::P2))
                .map_err(|e| format!("{scenario} {}: {e}", fw.name()))?;
            values.push((fw, r.best_cost.total));
        }
        let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let got = values.iter().find(|v| v.0 == expected).unwrap().1;
        let tol = 1e-9 * min.abs().max(1.0);
        let winners: Vec<&str> = values.iter().filter(|v| v.1 <= min + tol).map(|v| v.0.name()).collect();
        table += &format!(
            "\n    {scenario}: {} (minimum attained by {})",
            values.iter().map(|(f, v)| format!("{}={v:.6}", f.name())).collect::<Vec<_>>().join(", "),
            winners.join(", ")
        );
        if got > min + tol {
            failures.push(format!("{scenario}: {} does not attain the minimum", expected.name()));
        }
    }
    within(t0, Duration::from_secs(120), "oracle ranking")?;
    if failures.is_empty() {
        Ok(format!("oracle P2 optima at step 0.05:{table}"))
    } else {
        Err(format!("{}:{table}", failures.join("; ")))
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    vec_offload::harness::quantile(&v, 0.5)
}

fn c6_solver_ordering() -> Outcome {
    let t0 = Instant::now();
    let spec = ExperimentSpec {
        scenario: "default".into(),
        solvers: vec![
            SolverKind::SyncFql,
            SolverKind::AsyncFql,
            SolverKind::Ql,
            SolverKind::Greedy,
            SolverKind::Relax,
        ],
        masks: vec![Framework::Cv2xDsrcCmmw],
        n_runs: 100,
        base_seed: 2024,
        ..ExperimentSpec::default()
    };
    let rows = run_experiment(&spec).map_err(|e| e.to_string())?;
    check(rows.iter().all(|r| r.is_ok()), "a solver run failed")?;
    let med = |k: SolverKind| median(rows.iter().filter(|r| r.solver == k).map(|r| r.p2_total).collect());
    let (sync, asyn, ql) = (med(SolverKind::SyncFql), med(SolverKind::AsyncFql), med(SolverKind::Ql));
    let (greedy, relax) = (med(SolverKind::Greedy), med(SolverKind::Relax));
    within(t0, Duration::from_secs(600), "solver comparison")?;
    let detail = format!(
        "medians over 100 seeds: sync-fql {sync:.3}, async-fql {asyn:.3}, ql {ql:.3}, greedy {greedy:.3}, relax {relax:.3}"
    );
    let mut broken = Vec::new();
    if sync > asyn {
        broken.push("sync-fql > async-fql");
    }
    if asyn > ql {
        broken.push("async-fql > ql");
    }
    if [sync, asyn, ql].iter().any(|m| *m > greedy) {
        broken.push("a learner median exceeds greedy");
    }
    if [sync, asyn, ql].iter().any(|m| *m > relax) {
        broken.push("a learner median exceeds relax");
    }
    if broken.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", broken.join(", ")))
    }
}

/// Largest change of the relaxed objective when any one task's row moves
/// by one grid cell between two technologies, times the number of shares
/// the snap can lower.
fn snap_penalty_bound(s: &ScenarioConfig) -> f64 {
    let k = s.n_tasks();
    let techs: Vec<TechKind> = s.tech_mask.iter().collect();
    let base = Allocation::uniform(k, s.tech_mask);
    let f0 = objective_p3(&base, s);
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for &a in &techs {
            for &b in &techs {
                if a == b {
                    continue;
                }
                let mut x = base.clone();
                x.set(i, a, x.get(i, a) + 0.01);
                x.set(i, b, x.get(i, b) - 0.01);
                worst = worst.max((objective_p3(&x, s) - f0).abs());
            }
        }
        total += worst * (techs.len() - 1) as f64;
    }
    total
}

fn c7_oracle_dominance() -> Outcome {
    let masks = [
        TechMask::from_techs(&[TechKind::Cv2i, TechKind::Dsrc]),
        TechMask::from_techs(&[TechKind::Cv2v, TechKind::Cmmw]),
        TechMask::from_techs(&[TechKind::Cv2i, TechKind::Cv2v]),
        TechMask::from_techs(&[TechKind::Dsrc, TechKind::Cmmw]),
    ];
    let mut instances = 0;
    let mut worst_gap = (0.0f64, String::new());
    for name in ["default", "light", "heavy"] {
        for mask in masks {
            let mut s = default_scenario(name).unwrap().with_mask(mask, false);
            s.tasks.truncate(2);
            let label = format!("{name} {:?}", mask.names());
            let p2 = oracle_grid_search(&s, OracleOptions::new(0.01, Objective::P2)).map_err(|e| e.to_string())?;
            let p3 = oracle_grid_search(&s, OracleOptions::new(0.01, Objective::P3)).map_err(|e| e.to_string())?;
            let opt = p2.best_cost.total;
            let tol = 1e-9 * opt.abs().max(1.0);

            let mut results = vec![("greedy".to_string(), run_greedy(&s, 10_000).unwrap().best_cost.total)];
            for seed in 0..5 {
                let h = Hyperparams { seed, ..Hyperparams::default() };
                let sync = run_fql(&s, &Hyperparams { aggregation: Aggregation::Sync, ..h }).unwrap();
                let asyn = run_fql(&s, &Hyperparams { aggregation: Aggregation::Async, ..h }).unwrap();
                results.push((format!("sync-fql seed {seed}"), sync.best_cost.total));
                results.push((format!("async-fql seed {seed}"), asyn.best_cost.total));
                results.push((format!("ql seed {seed}"), run_qlearning(&s, &h).unwrap().best_cost.total));
            }
            let lp = run_relaxation(&s).map_err(|e| e.to_string())?;
            let snapped = lp.snapped.clone().unwrap();
            results.push(("relax (snapped)".into(), snapped.cost.total));
            for (who, v) in &results {
                check(*v >= opt - tol, format!("{label}: {who} P2 {v} below oracle {opt}"))?;
            }
            let g = results[0].1 - opt;
            if g > worst_gap.0 {
                worst_gap = (g, label.clone());
            }

            let p3_opt = p3.objective_value;
            let p3_tol = 1e-9 * p3_opt.abs().max(1.0);
            if lp.notes.is_empty() {
                check(
                    lp.objective_value <= p3_opt + p3_tol,
                    format!("{label}: LP {} above grid optimum {p3_opt}", lp.objective_value),
                )?;
            }
            let bound = snap_penalty_bound(&s);
            let snapped_p3 = objective_p3(&snapped.rho, &s);
            check(
                snapped_p3 <= p3_opt + bound + p3_tol,
                format!("{label}: snapped LP {snapped_p3} exceeds {p3_opt} + {bound}"),
            )?;
            instances += 1;
        }
    }
    Ok(format!(
        "{instances} instances; largest greedy gap {:.3} ({})",
        worst_gap.0, worst_gap.1
    ))
}

fn c8_lp_audit() -> Outcome {
    let s = default_scenario("default").unwrap();
    let lp = run_relaxation(&s).map_err(|e| e.to_string())?;
    check(lp.notes.is_empty(), format!("polytope was restricted: {:?}", lp.notes))?;
    let best = lp.objective_value;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    let mut sampled = 0;
    while sampled < 10_000 {
        let rho = common::random_allocation(&mut rng, s.n_tasks(), s.tech_mask);
        if !feasibility(&rho, &s).all_ok() {
            continue;
        }
        sampled += 1;
        let v = objective_p3(&rho, &s);
        check(best <= v + 1e-9 * v.abs().max(1.0), format!("sample beats LP: {v} < {best}"))?;
    }
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = common::random_allocation(&mut rng, s.n_tasks(), s.tech_mask);
        let y = common::random_allocation(&mut rng, s.n_tasks(), s.tech_mask);
        let a: f64 = rng.gen_range(-1.0..2.0);
        let mix = Allocation::from_rows(
            x.rows().iter().zip(y.rows()).map(|(p, q)| std::array::from_fn(|k| a * p[k] + (1.0 - a) * q[k])).collect(),
        );
        let (fx, fy, fm) = (objective_p3(&x, &s), objective_p3(&y, &s), objective_p3(&mix, &s));
        let want = a * fx + (1.0 - a) * fy;
        let err = (fm - want).abs() / want.abs().max(fx.abs()).max(fy.abs()).max(1.0);
        worst = worst.max(err);
        check(err <= 1e-9, format!("superposition off by {err}"))?;
    }
    Ok(format!("LP value {best:.3} below 10000 samples; superposition error {worst:.1e}"))
}

fn c9_update_identities() -> Outcome {
    check(q_update_value(5.0, 3.0, 99.0, 1.0, 0.0) == 3.0, "alpha 1, gamma 0 must overwrite")?;
    check(q_update_value(0.0, 10.0, 20.0, 0.5, 0.9) == 14.0, "worked update must give 14")?;
    check(q_update_value(-4.0, 1e3, 1e3, 0.0, 0.9) == -4.0, "alpha 0 must freeze")?;
    let one = QTable::filled(1, 1.0);
    let three = QTable::filled(1, 3.0);
    let got = aggregate_consensus(&QTable::filled(1, 42.0), &[one.clone(), three.clone()], 1).unwrap();
    check(got == QTable::filled(1, 2.0), "n_update 1 must give the mean")?;
    let got = aggregate_consensus(&QTable::zeros(1), &[one, three], 2).unwrap();
    check(got == QTable::filled(1, 1.0), "worked consensus must give 1")?;
    // Dyadic entries keep every intermediate exact, so equality is bitwise.
    let c = QTable::filled(3, 0.75);
    for n in 1..=5 {
        let got = aggregate_consensus(&c, &vec![c.clone(); 5], n).unwrap();
        check(got == c, format!("fixed point broken at n_update {n}"))?;
    }
    let c = QTable::filled(3, 0.7);
    for n in 1..=5 {
        let got = aggregate_consensus(&c, &vec![c.clone(); 5], n).unwrap();
        let off = got.values().iter().map(|v| (v - 0.7).abs()).fold(0.0, f64::max);
        check(off <= 4.0 * f64::EPSILON, format!("fixed point drifts by {off} at n_update {n}"))?;
    }
    Ok("update and consensus identities exact".into())
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = dir.path().join("spec.toml");
    std::fs::write(
        &spec,
        "scenario = \"default\"\n\
         solvers = [\"sync-fql\", \"async-fql\", \"ql\", \"greedy\", \"relax\"]\n\
         masks = [\"CV2X-DSRC-CMMW\", \"CV2X-RMMW\"]\n\
         n_runs = 4\nbase_seed = 7\noutput = \"out.csv\"\n\
         [hyperparams]\nn_rounds = 60\n",
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in ["1", "4", "0"] {
        let out = dir.path().join(format!("out_{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_vec-offload"))
            .args(["run", "--spec"])
            .arg(&spec)
            .arg("--output")
            .arg(&out)
            .env("VEC_OFFLOAD_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), format!("run failed: {}", String::from_utf8_lossy(&status.stderr)))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(outputs.windows(2).all(|w| w[0] == w[1]), "CSV bytes differ between runs")?;
    Ok(format!("3 runs ({} bytes each) identical across thread counts", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("formula oracle equivalence", c1_formula_oracle),
        ("inversion identity", c2_inversion),
        ("bound monotonicity sweeps", c3_monotonicity),
        ("RmmW and C-V2V coincide", c4_rmmw_coincidence),
        ("framework ranking by oracle", c5_framework_ranking),
        ("solver ordering by median", c6_solver_ordering),
        ("oracle dominance", c7_oracle_dominance),
        ("LP optimality audit", c8_lp_audit),
        ("update and consensus identities", c9_update_identities),
        ("CSV determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (tag, msg) = match std::panic::catch_unwind(f) {
            Ok(Ok(m)) => ("PASS", m),
            Ok(Err(m)) => ("FAIL", m),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {tag}: {name} [{:.2?}] {msg}", n + 1, t0.elapsed());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
