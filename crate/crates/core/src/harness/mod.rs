//! Experiment runner: solver-by-framework grids, parameter sweeps and their
//! CSV outputs.
//!
//! Cells of an experiment are independent and may run in parallel, but
//! results are always collected and written in cell order. Each cell draws
//! its seed from a stable hash of its coordinates, so output bytes depend
//! only on the spec. Wall-clock time goes to a separate sidecar file for
//! the same reason.

pub mod format;
pub mod sweep;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::model::{default_scenario, load_scenario, ConfigError, Framework, ScenarioConfig, TechKind, N_TECH};
use crate::netcalc::failure_log_prob;
use crate::solvers::{
    oracle_grid_search, run_fql, run_greedy, run_qlearning, run_relaxation, Aggregation, Hyperparams, Objective,
    OracleOptions, SolveError, SolveResult,
};

pub use format::{fmt_num, quantile};
pub use sweep::{run_sweep, SweepRow, SweepSpec, SweepVar};

/// Environment variable capping worker threads (0 or unset: one per core).
pub const THREADS_ENV: &str = "VEC_OFFLOAD_THREADS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    SyncFql,
    AsyncFql,
    Ql,
    Greedy,
    Relax,
    Oracle,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::SyncFql,
        SolverKind::AsyncFql,
        SolverKind::Ql,
        SolverKind::Greedy,
        SolverKind::Relax,
        SolverKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::SyncFql => "sync-fql",
            SolverKind::AsyncFql => "async-fql",
            SolverKind::Ql => "ql",
            SolverKind::Greedy => "greedy",
            SolverKind::Relax => "relax",
            SolverKind::Oracle => "oracle",
        }
    }

    /// Whether repeated runs differ by seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, SolverKind::SyncFql | SolverKind::AsyncFql | SolverKind::Ql)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::Spec(format!("unknown solver `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Preset name or path to a scenario file.
    pub scenario: String,
    pub solvers: Vec<SolverKind>,
    pub masks: Vec<Framework>,
    pub n_runs: usize,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    pub oracle_step: f64,
    /// Search-node cap for the oracle.
    pub oracle_budget: u64,
    pub greedy_max_steps: usize,
    /// Learner settings; `seed` and `aggregation` are set per cell.
    pub hyperparams: Hyperparams,
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            scenario: "default".into(),
            solvers: SolverKind::ALL[..5].to_vec(),
            masks: Framework::ALL.to_vec(),
            n_runs: 1,
            base_seed: 0,
            output: None,
            oracle_step: 0.05,
            oracle_budget: 20_000_000,
            greedy_max_steps: 10_000,
            hyperparams: Hyperparams::default(),
            sweep: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    scenario: Option<String>,
    solvers: Option<Vec<String>>,
    masks: Option<Vec<String>>,
    n_runs: Option<usize>,
    base_seed: Option<u64>,
    output: Option<PathBuf>,
    oracle_step: Option<f64>,
    oracle_budget: Option<u64>,
    greedy_max_steps: Option<usize>,
    hyperparams: Option<HyperparamsFile>,
    sweep: Option<SweepSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperparamsFile {
    alpha: Option<f64>,
    gamma: Option<f64>,
    p_exploit: Option<f64>,
    n_rounds: Option<usize>,
    standard_bootstrap: Option<bool>,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let f: SpecFile = toml::from_str(text).map_err(|e| HarnessError::Spec(e.message().to_string()))?;
        let d = ExperimentSpec::default();
        let mut h = d.hyperparams;
        if let Some(hf) = f.hyperparams {
            h.alpha = hf.alpha.unwrap_or(h.alpha);
            h.gamma = hf.gamma.unwrap_or(h.gamma);
            h.p_exploit = hf.p_exploit.unwrap_or(h.p_exploit);
            h.n_rounds = hf.n_rounds.unwrap_or(h.n_rounds);
            h.standard_bootstrap = hf.standard_bootstrap.unwrap_or(h.standard_bootstrap);
        }
        let spec = ExperimentSpec {
            scenario: f.scenario.unwrap_or(d.scenario),
            solvers: match f.solvers {
                Some(v) => v.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
                None => d.solvers,
            },
            masks: match f.masks {
                Some(v) => v.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
                None => d.masks,
            },
            n_runs: f.n_runs.unwrap_or(d.n_runs),
            base_seed: f.base_seed.unwrap_or(d.base_seed),
            output: f.output,
            oracle_step: f.oracle_step.unwrap_or(d.oracle_step),
            oracle_budget: f.oracle_budget.unwrap_or(d.oracle_budget),
            greedy_max_steps: f.greedy_max_steps.unwrap_or(d.greedy_max_steps),
            hyperparams: h,
            sweep: f.sweep,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut spec = Self::parse(&text)?;
        // Relative paths in a spec file are relative to that file.
        let dir = path.parent().unwrap_or(Path::new(""));
        if default_scenario(&spec.scenario).is_err() {
            spec.scenario = dir.join(&spec.scenario).to_string_lossy().into_owned();
        }
        if let Some(out) = &spec.output {
            spec.output = Some(dir.join(out));
        }
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        if self.n_runs == 0 {
            return Err(HarnessError::Spec("n_runs must be >= 1".into()));
        }
        if self.solvers.is_empty() || self.masks.is_empty() {
            return Err(HarnessError::Spec("solvers and masks must be non-empty".into()));
        }
        self.hyperparams
            .validate()
            .map_err(|e| HarnessError::Spec(e.to_string()))?;
        crate::solvers::oracle::grid_points(N_TECH, self.oracle_step)
            .map_err(|e| HarnessError::Spec(e.to_string()))?;
        if let Some(sw) = &self.sweep {
            sw.values()?;
        }
        Ok(())
    }
}

/// Resolves a preset name or scenario file.
pub fn resolve_scenario(name: &str) -> Result<ScenarioConfig, HarnessError> {
    match default_scenario(name) {
        Ok(s) => Ok(s),
        Err(_) => {
            let path = Path::new(name);
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            Ok(load_scenario(&text)?)
        }
    }
}

/// FNV-1a over the cell coordinates, finished with a SplitMix64 round.
pub fn cell_seed(base_seed: u64, solver: SolverKind, mask: Framework, run: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&base_seed.to_le_bytes());
    eat(solver.name().as_bytes());
    eat(&[0xff]);
    eat(mask.name().as_bytes());
    eat(&[0xff]);
    eat(&(run as u64).to_le_bytes());
    crate::solvers::qlearn::mix_seed(h, 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub solver: SolverKind,
    pub mask: Framework,
    pub run: usize,
    pub seed: u64,
    pub p2_total: f64,
    pub comm: f64,
    pub comp: f64,
    pub fail_penalty: f64,
    /// Per technology: largest `ln ε` at the deadline over the tasks that
    /// use it; NaN if no task does.
    pub ln_eps: [f64; N_TECH],
    pub wall_time: f64,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

fn per_tech_ln_eps(r: &SolveResult, s: &ScenarioConfig) -> [f64; N_TECH] {
    let mut out = [f64::NAN; N_TECH];
    for t in TechKind::ALL {
        for i in 0..s.n_tasks() {
            if r.best_rho.get(i, t) > 0.0 {
                let v = failure_log_prob(t, i, &r.best_rho, s, s.tasks[i].t_max);
                let cur = &mut out[t.index()];
                *cur = if cur.is_nan() { v } else { cur.max(v) };
            }
        }
    }
    out
}

fn solve_cell(spec: &ExperimentSpec, s: &ScenarioConfig, solver: SolverKind, seed: u64) -> Result<SolveResult, SolveError> {
    let h = Hyperparams {
        seed,
        ..spec.hyperparams
    };
    match solver {
        SolverKind::SyncFql => run_fql(s, &Hyperparams { aggregation: Aggregation::Sync, ..h }),
        SolverKind::AsyncFql => run_fql(s, &Hyperparams { aggregation: Aggregation::Async, ..h }),
        SolverKind::Ql => run_qlearning(s, &h),
        SolverKind::Greedy => run_greedy(s, spec.greedy_max_steps),
        SolverKind::Relax => run_relaxation(s),
        SolverKind::Oracle => {
            let mut o = OracleOptions::new(spec.oracle_step, Objective::P2);
            o.budget = spec.oracle_budget;
            oracle_grid_search(s, o)
        }
    }
}

/// Builds a thread pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> rayon::ThreadPool {
    let n = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .expect("thread pool")
}

/// Runs every (solver, mask, run) cell. Deterministic solvers run once per
/// mask. Solver failures become error rows.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    spec.check()?;
    let base = resolve_scenario(&spec.scenario)?;
    let mut cells = Vec::new();
    for &solver in &spec.solvers {
        for &mask in &spec.masks {
            let runs = if solver.is_stochastic() { spec.n_runs } else { 1 };
            for run in 0..runs {
                cells.push((solver, mask, run));
            }
        }
    }
    let scenarios: Vec<(Framework, ScenarioConfig)> = spec.masks.iter().map(|m| (*m, m.apply(&base))).collect();

    let rows = thread_pool().install(|| {
        cells
            .par_iter()
            .map(|&(solver, mask, run)| {
                let s = &scenarios.iter().find(|(m, _)| *m == mask).expect("mask").1;
                let seed = cell_seed(spec.base_seed, solver, mask, run);
                let mut row = ResultRow {
                    solver,
                    mask,
                    run,
                    seed,
                    p2_total: f64::NAN,
                    comm: f64::NAN,
                    comp: f64::NAN,
                    fail_penalty: f64::NAN,
                    ln_eps: [f64::NAN; N_TECH],
                    wall_time: 0.0,
                    error: None,
                };
                match solve_cell(spec, s, solver, seed) {
                    Ok(r) => {
                        row.p2_total = r.best_cost.total;
                        row.comm = r.best_cost.comm;
                        row.comp = r.best_cost.comp;
                        row.fail_penalty = r.best_cost.fail_penalty;
                        row.ln_eps = per_tech_ln_eps(&r, s);
                        row.wall_time = r.wall_time;
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row
            })
            .collect()
    });
    Ok(rows)
}

pub const RESULT_HEADER: [&str; 15] = [
    "solver",
    "mask",
    "run",
    "seed",
    "status",
    "p2_total",
    "comm",
    "comp",
    "fail_penalty",
    "ln_eps_dsrc",
    "ln_eps_cv2i",
    "ln_eps_cv2v",
    "ln_eps_cmmw",
    "ln_eps_local",
    "error",
];

fn create(path: &Path) -> Result<csv::Writer<std::fs::File>, HarnessError> {
    let f = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

/// Writes result rows (without timings) to `path`.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        let mut rec = vec![
            r.solver.name().to_string(),
            r.mask.name().to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            if r.is_ok() { "ok" } else { "error" }.to_string(),
            fmt_num(r.p2_total),
            fmt_num(r.comm),
            fmt_num(r.comp),
            fmt_num(r.fail_penalty),
        ];
        rec.extend(r.ln_eps.iter().map(|v| fmt_num(*v)));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Wall-clock seconds per cell, kept apart so the main CSV is reproducible.
pub fn emit_timing_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    w.write_record(["solver", "mask", "run", "wall_time"])?;
    for r in rows {
        w.write_record([
            r.solver.name().to_string(),
            r.mask.name().to_string(),
            r.run.to_string(),
            fmt_num(r.wall_time),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub solver: String,
    pub mask: String,
    pub n_ok: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// P2 order statistics per (solver, mask), in first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(SolverKind, Framework)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.solver, r.mask)) {
            keys.push((r.solver, r.mask));
        }
    }
    keys.into_iter()
        .map(|(solver, mask)| {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r.solver == solver && r.mask == mask && r.is_ok())
                .map(|r| r.p2_total)
                .collect();
            v.sort_by(f64::total_cmp);
            let q = |p: f64| if v.is_empty() { f64::NAN } else { quantile(&v, p) };
            SummaryRow {
                solver: solver.name().into(),
                mask: mask.name().into(),
                n_ok: v.len(),
                median: q(0.5),
                q1: q(0.25),
                q3: q(0.75),
                min: q(0.0),
                max: q(1.0),
            }
        })
        .collect()
}

pub fn emit_summary_csv(summary: &[SummaryRow], path: &Path) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    w.write_record(["solver", "mask", "n_ok", "median", "q1", "q3", "min", "max"])?;
    for r in summary {
        w.write_record([
            r.solver.clone(),
            r.mask.clone(),
            r.n_ok.to_string(),
            fmt_num(r.median),
            fmt_num(r.q1),
            fmt_num(r.q3),
            fmt_num(r.min),
            fmt_num(r.max),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Writes sweep rows; the first line is a comment naming the background
/// allocation and the fixed parameters.
pub fn emit_sweep_csv(rows: &[SweepRow], var: SweepVar, out: impl std::io::Write) -> Result<(), HarnessError> {
    let mut out = out;
    let fixed = match var {
        SweepVar::Lambda => format!(", burstiness = {}", sweep::FIXED_BURSTINESS),
        SweepVar::Burstiness => format!(", lambda = {}", sweep::FIXED_RATE),
        SweepVar::TMax => String::new(),
    };
    writeln!(
        out,
        "# task 0, equal shares across masked technologies, epsilon = {}{}",
        sweep::SWEEP_EPSILON,
        fixed
    )
    .map_err(|e| HarnessError::io(Path::new("<sweep output>"), e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([var.name(), "tech", var.metric()])?;
    for r in rows {
        w.write_record([fmt_num(r.value), r.tech.name().to_string(), fmt_num(r.result)])?;
    }
    w.flush().map_err(|e| HarnessError::io(Path::new("<sweep output>"), e))?;
    Ok(())
}

/// `results.csv` → `results.<suffix>.csv`.
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing_and_defaults() {
        let spec = ExperimentSpec::parse(
            r#"
            scenario = "light"
            solvers = ["oracle", "greedy"]
            masks = ["CV2X-DSRC"]
            n_runs = 3
            [hyperparams]
            n_rounds = 10
            "#,
        )
        .unwrap();
        assert_eq!(spec.solvers, vec![SolverKind::Oracle, SolverKind::Greedy]);
        assert_eq!(spec.masks, vec![Framework::Cv2xDsrc]);
        assert_eq!(spec.hyperparams.n_rounds, 10);
        assert_eq!(spec.hyperparams.alpha, 0.1);
        assert!(ExperimentSpec::parse("n_runs = 0").is_err());
        assert!(ExperimentSpec::parse("bogus = 1").is_err());
        assert!(ExperimentSpec::parse("solvers = [\"dqn\"]").is_err());
        assert!(ExperimentSpec::parse("oracle_step = 0.3").is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = cell_seed(1, SolverKind::SyncFql, Framework::Cv2xDsrc, 0);
        assert_eq!(a, cell_seed(1, SolverKind::SyncFql, Framework::Cv2xDsrc, 0));
        assert_ne!(a, cell_seed(1, SolverKind::SyncFql, Framework::Cv2xDsrc, 1));
        assert_ne!(a, cell_seed(1, SolverKind::AsyncFql, Framework::Cv2xDsrc, 0));
        assert_ne!(a, cell_seed(2, SolverKind::SyncFql, Framework::Cv2xDsrc, 0));
    }

    #[test]
    fn single_oracle_cell() {
        let spec = ExperimentSpec {
            scenario: "light".into(),
            solvers: vec![SolverKind::Oracle],
            masks: vec![Framework::Cv2xDsrc],
            ..ExperimentSpec::default()
        };
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert!(r.is_ok());
        assert!((r.p2_total - (r.comm + r.comp + r.fail_penalty)).abs() < 1e-9);
        assert!(r.ln_eps[TechKind::Cv2i.index()] < 0.0);
        assert!(r.ln_eps[TechKind::Cmmw.index()].is_nan());
    }

    #[test]
    fn error_rows_are_recorded() {
        let spec = ExperimentSpec {
            solvers: vec![SolverKind::Oracle, SolverKind::Greedy],
            masks: vec![Framework::Cv2xDsrc],
            oracle_budget: 1,
            ..ExperimentSpec::default()
        };
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].error.as_deref().unwrap().contains("budget"));
        assert!(rows[0].p2_total.is_nan());
        assert!(rows[1].is_ok());
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(
            sidecar_path(Path::new("out/res.csv"), "timing"),
            PathBuf::from("out/res.timing.csv")
        );
    }
}
