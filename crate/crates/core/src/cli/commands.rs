use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::ExperimentConfig;
use crate::diagnostics::{
    estimate_constants, estimate_grad_phi, inner_step, rate_fit, run_checks, write_trace_csv, CheckReport, RateFit,
    RatePoint,
};
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;
use crate::problems::{MinimaxProblem, ProblemConstants};
use crate::solvers::{run, validate_config, Algorithm, ConfigWarning, RunOptions, RunResult, SolverConfig};
use crate::{rng, Vector};

/// Where the constants used for validation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsSource {
    User,
    Analytic,
    /// Sampled lower bounds.
    Estimated,
}

/// JSON summary written next to the trace of a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub iterations: usize,
    pub zeta: usize,
    /// Mean of the recorded `|grad Phi(x_t)|`.
    pub averaged_stationarity: Option<f64>,
    /// `|grad Phi(x_zeta)|`.
    pub output_stationarity: f64,
    /// `|grad Phi|` at the last iterate.
    pub final_stationarity: f64,
    pub final_f: f64,
    pub samples: u64,
    pub warm_start_evaluations: u64,
    pub constants: ProblemConstants,
    pub constants_source: ConstantsSource,
    pub warnings: Vec<ConfigWarning>,
    pub wall_time_seconds: f64,
    pub config: ExperimentConfig,
}

fn resolve_constants(
    cfg: &ExperimentConfig,
    p: &dyn MinimaxProblem,
    seed: u64,
) -> Result<(ProblemConstants, ConstantsSource)> {
    if let Some(c) = &cfg.constants {
        c.validate()?;
        return Ok((c.clone(), ConstantsSource::User));
    }
    if let Some(c) = p.constants() {
        return Ok((c, ConstantsSource::Analytic));
    }
    let c = estimate_constants(p, 64, &mut rng::derive(seed, "constants"))?;
    Ok((c, ConstantsSource::Estimated))
}

fn stationarity_at(p: &dyn MinimaxProblem, x: &ManifoldPoint, y: &Vector, cfg: &ExperimentConfig, lambda: f64) -> f64 {
    match p.grad_phi(x) {
        Some(g) => g.norm(),
        None => {
            let t = &cfg.trace;
            estimate_grad_phi(p, x, y, inner_step(p, lambda), t.inner_tol, t.max_inner).norm
        }
    }
}

/// Runs one solver configuration of an experiment and summarizes it.
pub fn execute(
    cfg: &ExperimentConfig,
    p: &dyn MinimaxProblem,
    solver: &SolverConfig,
) -> Result<(RunResult, RunSummary)> {
    let (constants, source) = resolve_constants(cfg, p, solver.seed)?;
    let warnings = validate_config(&constants, solver);
    for w in &warnings {
        warn!("{}: {}", w.condition, w.message);
    }
    let opts = RunOptions { trace: cfg.trace.clone(), constants: Some(constants.clone()), x0: cfg.start(p)?, y0: None };
    let started = Instant::now();
    let result = run(p, solver, &opts)?;
    let wall = started.elapsed().as_secs_f64();
    let summary = RunSummary {
        problem: p.name().to_string(),
        algorithm: solver.algorithm,
        seed: solver.seed,
        iterations: solver.iterations,
        zeta: result.zeta,
        averaged_stationarity: result.averaged_stationarity(),
        output_stationarity: stationarity_at(p, &result.x_zeta, &result.y_zeta, cfg, solver.lambda),
        final_stationarity: stationarity_at(p, &result.x_final, &result.y_final, cfg, solver.lambda),
        final_f: p.value(&result.x_final, &result.y_final),
        samples: result.samples,
        warm_start_evaluations: result.warm_start_evaluations,
        constants,
        constants_source: source,
        warnings,
        wall_time_seconds: wall,
        config: cfg.clone(),
    };
    Ok((result, summary))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn out_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs the experiment and writes `trace.csv` and `summary.json` to the
/// output directory.
pub fn cmd_run(config: &Path, out: Option<&Path>) -> Result<RunSummary> {
    let cfg = ExperimentConfig::load(config)?;
    let p = cfg.build_problem()?;
    let solver = cfg.solver_config();
    let (result, summary) = execute(&cfg, p.as_ref(), &solver)?;
    let dir = out_dir(&cfg, out);
    create_dir(&dir)?;
    let trace_path = dir.join("trace.csv");
    let file = fs::File::create(&trace_path).map_err(|e| Error::io(&trace_path, e))?;
    write_trace_csv(&result.trace, std::io::BufWriter::new(file))?;
    write_json(&dir.join("summary.json"), &summary)?;
    info!("wrote {} and summary.json", trace_path.display());
    Ok(summary)
}

/// Sweep axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum Axis {
    #[value(name = "T")]
    #[serde(rename = "T")]
    T,
    #[value(name = "B")]
    #[serde(rename = "B")]
    B,
    #[value(name = "gamma")]
    #[serde(rename = "gamma")]
    Gamma,
    #[value(name = "lambda")]
    #[serde(rename = "lambda")]
    Lambda,
}

fn apply_axis(base: &SolverConfig, axis: Axis, value: f64) -> Result<SolverConfig> {
    let mut s = base.clone();
    let count = |v: f64| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 && v < 1e15 {
            Ok(v as usize)
        } else {
            Err(Error::Config(format!("{axis:?} values must be positive integers, got {v}")))
        }
    };
    match axis {
        Axis::T => s.iterations = count(value)?,
        Axis::B => s.batch_size = count(value)?,
        Axis::Gamma => s.gamma = value,
        Axis::Lambda => s.lambda = value,
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub averaged_stationarity: f64,
    pub samples: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    /// Rate fit of averaged stationarity against `T` (axis `T` only).
    pub rate: Option<RateFit>,
}

fn seeds_from(base: u64, count: u64) -> Vec<u64> {
    (0..count).map(|k| base.wrapping_add(k)).collect()
}

fn averaged(result: &RunResult) -> Result<f64> {
    result
        .averaged_stationarity()
        .ok_or_else(|| Error::Config("sweeps and comparisons need trace.stationarity_every > 0".into()))
}

/// One run per `(value, seed)`; writes `sweep.csv` and `sweep_summary.json`.
pub fn cmd_sweep(config: &Path, axis: Axis, values: &[f64], seeds: u64, out: Option<&Path>) -> Result<SweepSummary> {
    if values.len() < 2 {
        return Err(Error::Config("a sweep needs at least two values".into()));
    }
    if seeds == 0 {
        return Err(Error::Config("a sweep needs at least one seed".into()));
    }
    let cfg = ExperimentConfig::load(config)?;
    let p = cfg.build_problem()?;
    let base = cfg.solver_config();
    let seeds = seeds_from(base.seed, seeds);
    let jobs: Vec<(usize, f64, u64)> =
        values.iter().enumerate().flat_map(|(i, v)| seeds.iter().map(move |s| (i, *v, *s))).collect();
    let mut rows: Vec<(usize, SweepRow)> = jobs
        .par_iter()
        .map(|&(i, value, seed)| {
            let mut solver = apply_axis(&base, axis, value)?;
            solver.seed = seed;
            let (result, _) = execute(&cfg, p.as_ref(), &solver)?;
            Ok((i, SweepRow { value, seed, averaged_stationarity: averaged(&result)?, samples: result.samples }))
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|(i, r)| (*i, r.seed));
    let rows: Vec<SweepRow> = rows.into_iter().map(|(_, r)| r).collect();

    let rate = if axis == Axis::T {
        let points: Vec<RatePoint> = values
            .iter()
            .map(|&t| RatePoint {
                t,
                values: rows.iter().filter(|r| r.value == t).map(|r| r.averaged_stationarity).collect(),
            })
            .collect();
        match rate_fit(&points) {
            Ok(fit) => Some(fit),
            Err(e) => {
                warn!("no rate fit: {e}");
                None
            }
        }
    } else {
        None
    };

    let dir = out_dir(&cfg, out);
    create_dir(&dir)?;
    let mut csv = String::from("value,seed,averaged_stationarity,samples\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.value, r.seed, r.averaged_stationarity, r.samples));
    }
    let csv_path = dir.join("sweep.csv");
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    let summary = SweepSummary { axis, rows, rate };
    write_json(&dir.join("sweep_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareSummary {
    pub budget: u64,
    /// Solver labels in config order.
    pub solvers: Vec<String>,
    pub iterations: Vec<usize>,
    /// Averaged stationarity per seed, one row per seed.
    pub per_seed: Vec<CompareSeed>,
    pub medians: BTreeMap<String, f64>,
    pub wins: BTreeMap<String, u64>,
    /// Label with the lowest median.
    pub winner: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareSeed {
    pub seed: u64,
    pub averaged_stationarity: Vec<f64>,
    pub samples: Vec<u64>,
    pub winner: String,
}

/// Iterations that fit a sample budget: `budget / n` for RGDA,
/// `budget / B` for RSGDA and `budget / B - 1` for MVR-RSGDA, whose first
/// batch precedes the iterations.
pub fn iterations_for_budget(solver: &SolverConfig, n: usize, budget: u64) -> usize {
    let per_iter = match solver.algorithm {
        Algorithm::Rgda => n as u64,
        _ => solver.batch_size as u64,
    };
    let t = budget / per_iter.max(1);
    let t = if solver.algorithm == Algorithm::MvrRsgda { t.saturating_sub(1) } else { t };
    t as usize
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn labels(solvers: &[SolverConfig]) -> Vec<String> {
    solvers
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let dup = solvers.iter().filter(|o| o.algorithm == s.algorithm).count() > 1;
            if dup {
                format!("{}#{}", s.algorithm, i)
            } else {
                s.algorithm.to_string()
            }
        })
        .collect()
}

/// Equal-budget head-to-head of the solvers listed under `compare`; writes
/// `compare.csv` and `compare_summary.json`. `seeds` overrides
/// `compare.seeds`.
pub fn cmd_compare(config: &Path, budget: u64, seeds: Option<u64>, out: Option<&Path>) -> Result<CompareSummary> {
    let cfg = ExperimentConfig::load(config)?;
    let mut spec = cfg
        .compare
        .clone()
        .ok_or_else(|| Error::Config("compare needs a `compare` section listing the solvers".into()))?;
    if let Some(k) = seeds {
        spec.seeds = k;
    }
    if spec.solvers.len() < 2 {
        return Err(Error::Config("compare needs at least two solvers".into()));
    }
    if spec.seeds == 0 {
        return Err(Error::Config("compare needs at least one seed".into()));
    }
    let p = cfg.build_problem()?;
    let n = p.num_samples();
    let mut solvers = spec.solvers.clone();
    for s in &mut solvers {
        s.iterations = iterations_for_budget(s, n, budget);
        if s.iterations == 0 {
            return Err(Error::Config(format!("budget {budget} is too small for {}", s.algorithm)));
        }
    }
    let names = labels(&solvers);
    let base_seed = cfg.seed.unwrap_or(cfg.solver.seed);
    let seeds = seeds_from(base_seed, spec.seeds);
    let jobs: Vec<(u64, usize)> = seeds.iter().flat_map(|s| (0..solvers.len()).map(move |k| (*s, k))).collect();
    let results: BTreeMap<(u64, usize), (f64, u64)> = jobs
        .par_iter()
        .map(|&(seed, k)| {
            let mut s = solvers[k].clone();
            s.seed = seed;
            let (result, _) = execute(&cfg, p.as_ref(), &s)?;
            Ok(((seed, k), (averaged(&result)?, result.samples)))
        })
        .collect::<Result<_>>()?;

    let mut per_seed = Vec::new();
    let mut wins: BTreeMap<String, u64> = names.iter().map(|l| (l.clone(), 0)).collect();
    for &seed in &seeds {
        let vals: Vec<f64> = (0..solvers.len()).map(|k| results[&(seed, k)].0).collect();
        let samples: Vec<u64> = (0..solvers.len()).map(|k| results[&(seed, k)].1).collect();
        let best = (0..vals.len()).min_by(|a, b| vals[*a].total_cmp(&vals[*b])).expect("two solvers");
        *wins.get_mut(&names[best]).expect("label") += 1;
        per_seed.push(CompareSeed { seed, averaged_stationarity: vals, samples, winner: names[best].clone() });
    }
    let medians: BTreeMap<String, f64> = names
        .iter()
        .enumerate()
        .map(|(k, l)| (l.clone(), median(per_seed.iter().map(|r| r.averaged_stationarity[k]).collect())))
        .collect();
    let winner = medians.iter().min_by(|a, b| a.1.total_cmp(b.1)).map(|(l, _)| l.clone()).expect("two solvers");

    let dir = out_dir(&cfg, out);
    create_dir(&dir)?;
    let mut csv = String::from("seed,solver,averaged_stationarity,samples\n");
    for r in &per_seed {
        for (k, l) in names.iter().enumerate() {
            csv.push_str(&format!("{},{},{},{}\n", r.seed, l, r.averaged_stationarity[k], r.samples[k]));
        }
    }
    let csv_path = dir.join("compare.csv");
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    let summary = CompareSummary {
        budget,
        solvers: names,
        iterations: solvers.iter().map(|s| s.iterations).collect(),
        per_seed,
        medians,
        wins,
        winner,
    };
    write_json(&dir.join("compare_summary.json"), &summary)?;
    Ok(summary)
}

/// Runs the check suite and writes the reports as a JSON array.
pub fn cmd_check(filter: Option<&str>, seed: u64, report: &Path) -> Result<Vec<CheckReport>> {
    let reports = run_checks(filter, seed);
    if let Some(parent) = report.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_json(report, &json!({ "seed": seed, "filter": filter, "reports": reports }))?;
    Ok(reports)
}
