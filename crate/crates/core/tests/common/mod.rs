//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

use vec_offload::model::{validate, Allocation, ScenarioConfig, TaskSpec, TechKind, TechMask, N_TECH};

pub fn random_mask<R: Rng>(rng: &mut R) -> TechMask {
    let techs: Vec<TechKind> = [TechKind::Dsrc, TechKind::Cv2i, TechKind::Cv2v, TechKind::Cmmw]
        .into_iter()
        .filter(|_| rng.gen_bool(0.6))
        .collect();
    TechMask::from_techs(&techs)
}

/// A valid scenario with 1 to 6 tasks and randomized capacities.
pub fn random_scenario<R: Rng>(rng: &mut R) -> ScenarioConfig {
    let mut s = vec_offload::model::default_scenario("default").unwrap();
    let k = rng.gen_range(1..=6);
    s.tasks = (0..k)
        .map(|i| {
            let mut t = TaskSpec::new(
                i,
                rng.gen_range(1.0..150.0),
                rng.gen_range(0.5..400.0),
                rng.gen_range(0.05..5.0),
            );
            t.priority = rng.gen_range(0.0..3.0);
            t.complexity = rng.gen_range(0.1..2.0);
            t.fee_cv2x = rng.gen_range(0.0..2.0);
            t.fee_infra = rng.gen_range(0.0..2.0);
            t.fee_veh = rng.gen_range(0.0..2.0);
            t
        })
        .collect();
    s.n_vehicles = rng.gen_range(1..=8);
    s.theta_veh = rng.gen_range(200.0..5000.0);
    s.theta_epc = s.theta_veh * rng.gen_range(1.0..20.0);
    s.r_dsrc = rng.gen_range(100.0..3000.0);
    s.r_cv2x = rng.gen_range(1000.0..20000.0);
    s.rts_burstiness = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..5.0) };
    s.theta = rng.gen_range(0.1..2.0);
    s.tech_mask = random_mask(rng);
    s.rmmw_control = rng.gen_bool(0.3);
    s.dsrc_access_overhead_mb = if rng.gen_bool(0.2) {
        Some(rng.gen_range(0.0..20.0))
    } else {
        None
    };
    assert!(validate(&s).is_empty(), "{:?}", validate(&s));
    s
}

/// A row-stochastic allocation supported on `mask`, with some zero shares.
pub fn random_allocation<R: Rng>(rng: &mut R, n_tasks: usize, mask: TechMask) -> Allocation {
    let techs: Vec<TechKind> = mask.iter().collect();
    let rows = (0..n_tasks)
        .map(|_| {
            let mut row = [0.0; N_TECH];
            let mut sum = 0.0;
            for &t in &techs {
                if rng.gen_bool(0.75) {
                    let v = -rng.gen_range(1e-12f64..1.0).ln();
                    row[t.index()] = v;
                    sum += v;
                }
            }
            if sum == 0.0 {
                let t = techs[rng.gen_range(0..techs.len())];
                row[t.index()] = 1.0;
                sum = 1.0;
            }
            row.map(|v| v / sum)
        })
        .collect();
    Allocation::from_rows(rows)
}

/// Random grid allocation (multiples of 0.01) supported on `mask`.
pub fn random_grid_allocation<R: Rng>(rng: &mut R, n_tasks: usize, mask: TechMask) -> Allocation {
    let techs: Vec<TechKind> = mask.iter().collect();
    let rows: Vec<[u8; N_TECH]> = (0..n_tasks)
        .map(|_| {
            let mut row = [0u8; N_TECH];
            let mut left = 100u32;
            for (k, &t) in techs.iter().enumerate() {
                let v = if k + 1 == techs.len() { left } else { rng.gen_range(0..=left) };
                row[t.index()] = v as u8;
                left -= v;
            }
            row
        })
        .collect();
    Allocation::from_percent(&rows)
}
