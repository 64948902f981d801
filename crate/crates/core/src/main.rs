use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vec_offload::harness::{
    emit_csv, emit_summary_csv, emit_sweep_csv, emit_timing_csv, resolve_scenario, run_experiment, run_sweep,
    sidecar_path, summarize, ExperimentSpec, HarnessError, SolverKind, SweepSpec, SweepVar,
};
use vec_offload::model::{default_scenario, parse_scenario_unchecked, validate, Framework};
use vec_offload::solvers::{oracle_grid_search, Objective, OracleOptions};

const EXIT_ERROR_ROWS: u8 = 1;
const EXIT_SPEC: u8 = 2;

#[derive(Parser)]
#[command(name = "vec-offload", version, about = "Heterogeneous V2X offloading experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a solver-by-framework experiment and write CSV results.
    Run {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Preset name or scenario file.
        #[arg(long)]
        scenario: Option<String>,
        /// Comma-separated solver names.
        #[arg(long, value_delimiter = ',')]
        solvers: Option<Vec<String>>,
        /// Comma-separated framework names.
        #[arg(long, value_delimiter = ',')]
        masks: Option<Vec<String>>,
        #[arg(long)]
        n_runs: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep one task parameter and print per-technology bounds.
    Sweep {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        /// lambda, burstiness or t_max.
        #[arg(long)]
        var: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Framework preset; defaults to the scenario's own mask.
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact grid optimum for one framework.
    Oracle {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        mask: String,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// p2 or p3.
        #[arg(long, default_value = "p2")]
        objective: String,
    },
    /// Check a scenario file and list every violated invariant.
    Validate {
        #[arg(long)]
        scenario: String,
    },
}

/// Failure with the exit code it maps to.
struct Fail(u8, String);

impl From<HarnessError> for Fail {
    fn from(e: HarnessError) -> Self {
        let code = match e {
            HarnessError::Io { .. } | HarnessError::Csv(_) => EXIT_ERROR_ROWS,
            _ => EXIT_SPEC,
        };
        Fail(code, e.to_string())
    }
}

fn spec_err(e: impl ToString) -> Fail {
    Fail(EXIT_SPEC, e.to_string())
}

fn load_spec(path: Option<&Path>) -> Result<ExperimentSpec, Fail> {
    match path {
        Some(p) => Ok(ExperimentSpec::load(p)?),
        None => Ok(ExperimentSpec::default()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    spec: Option<PathBuf>,
    scenario: Option<String>,
    solvers: Option<Vec<String>>,
    masks: Option<Vec<String>>,
    n_runs: Option<usize>,
    base_seed: Option<u64>,
    output: Option<PathBuf>,
) -> Result<u8, Fail> {
    let mut spec = load_spec(spec.as_deref())?;
    if let Some(v) = scenario {
        spec.scenario = v;
    }
    if let Some(v) = solvers {
        spec.solvers = v.iter().map(|s| s.parse::<SolverKind>()).collect::<Result<_, _>>()?;
    }
    if let Some(v) = masks {
        spec.masks = v
            .iter()
            .map(|s| s.parse::<Framework>())
            .collect::<Result<_, _>>()
            .map_err(spec_err)?;
    }
    spec.n_runs = n_runs.unwrap_or(spec.n_runs);
    spec.base_seed = base_seed.unwrap_or(spec.base_seed);
    if output.is_some() {
        spec.output = output;
    }
    spec.check()?;
    let out = spec
        .output
        .clone()
        .ok_or_else(|| spec_err("no output path (set `output` or pass --output)"))?;

    let rows = run_experiment(&spec)?;
    emit_csv(&rows, &out)?;
    emit_timing_csv(&rows, &sidecar_path(&out, "timing"))?;
    let summary = summarize(&rows);
    emit_summary_csv(&summary, &sidecar_path(&out, "summary"))?;

    for r in &summary {
        println!(
            "{:<10} {:<15} n={:<4} median={} q1={} q3={}",
            r.solver,
            r.mask,
            r.n_ok,
            vec_offload::harness::fmt_num(r.median),
            vec_offload::harness::fmt_num(r.q1),
            vec_offload::harness::fmt_num(r.q3)
        );
    }
    let n_err = rows.iter().filter(|r| !r.is_ok()).count();
    if n_err > 0 {
        eprintln!("{n_err} cell(s) failed; see the error column of {}", out.display());
        return Ok(EXIT_ERROR_ROWS);
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    spec: Option<PathBuf>,
    scenario: Option<String>,
    var: Option<String>,
    from: Option<f64>,
    to: Option<f64>,
    step: Option<f64>,
    mask: Option<String>,
    output: Option<PathBuf>,
) -> Result<u8, Fail> {
    let file = match &spec {
        Some(p) => Some(ExperimentSpec::load(p)?),
        None => None,
    };
    let file_sweep = file.as_ref().and_then(|f| f.sweep);
    let pick = |flag: Option<f64>, key: Option<f64>, name: &str| {
        flag.or(key).ok_or_else(|| spec_err(format!("missing sweep `{name}`")))
    };
    let sweep = SweepSpec {
        var: match var {
            Some(v) => v.parse::<SweepVar>()?,
            None => file_sweep.map(|s| s.var).ok_or_else(|| spec_err("missing sweep `var`"))?,
        },
        from: pick(from, file_sweep.map(|s| s.from), "from")?,
        to: pick(to, file_sweep.map(|s| s.to), "to")?,
        step: pick(step, file_sweep.map(|s| s.step), "step")?,
    };
    let scenario = scenario
        .or_else(|| file.as_ref().map(|f| f.scenario.clone()))
        .unwrap_or_else(|| "default".into());
    let mut s = resolve_scenario(&scenario)?;
    if let Some(m) = mask {
        s = m.parse::<Framework>().map_err(spec_err)?.apply(&s);
    }
    let rows = run_sweep(&s, &sweep)?;
    let output = output.or_else(|| file.and_then(|f| f.output));
    match output {
        Some(p) => {
            let f = std::fs::File::create(&p).map_err(|e| Fail(EXIT_ERROR_ROWS, format!("{}: {e}", p.display())))?;
            emit_sweep_csv(&rows, sweep.var, f)?;
        }
        None => {
            let stdout = std::io::stdout();
            emit_sweep_csv(&rows, sweep.var, stdout.lock())?;
        }
    }
    Ok(0)
}

fn cmd_oracle(scenario: &str, mask: &str, step: f64, objective: &str) -> Result<u8, Fail> {
    let fw: Framework = mask.parse().map_err(spec_err)?;
    let objective = match objective.to_ascii_lowercase().as_str() {
        "p2" => Objective::P2,
        "p3" => Objective::P3,
        other => return Err(spec_err(format!("unknown objective `{other}`"))),
    };
    let s = fw.apply(&resolve_scenario(scenario)?);
    let r = match oracle_grid_search(&s, OracleOptions::new(step, objective)) {
        Ok(r) => r,
        Err(e @ vec_offload::SolveError::BadStep(_)) => return Err(spec_err(e)),
        Err(e) => return Err(Fail(EXIT_ERROR_ROWS, e.to_string())),
    };
    let fmt = vec_offload::harness::fmt_num;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "mask {}  step {}  objective {}", fw.name(), fmt(step), fmt(r.objective_value));
    let _ = writeln!(
        out,
        "p2 total {}  comm {}  comp {}  fail_penalty {}",
        fmt(r.best_cost.total),
        fmt(r.best_cost.comm),
        fmt(r.best_cost.comp),
        fmt(r.best_cost.fail_penalty)
    );
    let names: Vec<String> = s.tech_mask.names();
    let _ = writeln!(out, "task  {}", names.join("  "));
    for i in 0..s.n_tasks() {
        let shares: Vec<String> = s.tech_mask.iter().map(|t| fmt(r.best_rho.get(i, t))).collect();
        let _ = writeln!(out, "{i:<5} {}", shares.join("  "));
    }
    for n in &r.notes {
        let _ = writeln!(out, "# {n}");
    }
    Ok(0)
}

fn cmd_validate(scenario: &str) -> Result<u8, Fail> {
    let s = if default_scenario(scenario).is_ok() {
        default_scenario(scenario).map_err(spec_err)?
    } else {
        let text = std::fs::read_to_string(scenario).map_err(|e| spec_err(format!("{scenario}: {e}")))?;
        parse_scenario_unchecked(&text).map_err(spec_err)?
    };
    let violations = validate(&s);
    if violations.is_empty() {
        println!("ok: {} tasks, mask {}", s.n_tasks(), s.tech_mask.names().join(","));
        return Ok(0);
    }
    for v in &violations {
        println!("{}: {}", v.field, v.rule);
    }
    Ok(EXIT_SPEC)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run {
            spec,
            scenario,
            solvers,
            masks,
            n_runs,
            base_seed,
            output,
        } => cmd_run(spec, scenario, solvers, masks, n_runs, base_seed, output),
        Cmd::Sweep {
            spec,
            scenario,
            var,
            from,
            to,
            step,
            mask,
            output,
        } => cmd_sweep(spec, scenario, var, from, to, step, mask, output),
        Cmd::Oracle {
            scenario,
            mask,
            step,
            objective,
        } => cmd_oracle(&scenario, &mask, step, &objective),
        Cmd::Validate { scenario } => cmd_validate(&scenario),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
