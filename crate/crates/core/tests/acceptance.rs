//! Acceptance criteria. Runs as a plain binary so the per-criterion lines
//! are always printed; exits non-zero when any criterion fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rminmax::cli::{cmd_run, iterations_for_budget};
use rminmax::diagnostics::suite::{reference_quadratic, reference_rgda_config, reference_start};
use rminmax::diagnostics::{check_groups, estimator_error_trace, rate_fit, CheckReport, RatePoint, TraceOptions};
use rminmax::problems::{make_dro, make_quadratic_saddle, stoch_grads, synthetic_dro_samples, QuadraticSaddle};
use rminmax::solvers::{mvr_estimate, run, run_rgda, storm_update, theorem1_steps, RunOptions};
use rminmax::{ConvexSet, Mat, MinimaxProblem, SampleBatch, SolverConfig, Vector};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn groups(prefixes: &[&str], seed: u64) -> Vec<CheckReport> {
    check_groups()
        .into_iter()
        .filter(|g| prefixes.iter().any(|p| g.name.starts_with(p)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|g| g.run(seed))
        .collect::<Vec<_>>()
        .concat()
}

fn from_reports(reports: &[CheckReport]) -> Outcome {
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    let worst = reports.iter().map(|r| format!("{}={:.2e}", r.name, r.measured)).collect::<Vec<_>>().join(" ");
    if failed.is_empty() && !reports.is_empty() {
        Outcome::new(true, worst)
    } else {
        Outcome::new(false, format!("failed: {failed:?}; {worst}"))
    }
}

fn manifold_laws() -> Outcome {
    from_reports(&groups(&["manifold.", "transport."], 0))
}

fn projections() -> Outcome {
    from_reports(&groups(&["projection"], 0))
}

fn gradients() -> Outcome {
    from_reports(&groups(&["gradient"], 0))
}

fn oracle_identity() -> Outcome {
    from_reports(&groups(&["oracle"], 0))
}

fn lipschitz() -> Outcome {
    from_reports(&groups(&["lipschitz."], 0))
}

fn lyapunov() -> Outcome {
    from_reports(&groups(&["lyapunov."], 0))
}

fn deterministic_rate() -> Outcome {
    let p = reference_quadratic();
    let ts = [100usize, 400, 1600, 6400];
    let opts = RunOptions { x0: Some(reference_start()), ..RunOptions::default() };
    let points: Vec<RatePoint> = ts
        .par_iter()
        .map(|&t| {
            let r = run_rgda(&p, &reference_rgda_config(t), &opts).expect("rgda run");
            RatePoint { t: t as f64, values: vec![r.averaged_stationarity().expect("stationarity recorded")] }
        })
        .collect();
    let fit = rate_fit(&points).expect("rate fit");
    let values: Vec<String> = points.iter().map(|p| format!("{:.4e}", p.values[0])).collect();
    Outcome::new(
        (fit.slope + 0.5).abs() <= 0.15,
        format!("slope {:.4} (target -0.5 +- 0.15), averaged {}", fit.slope, values.join(", ")),
    )
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

fn noisy_quadratic(n: usize) -> QuadraticSaddle {
    let a = Mat::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0]));
    make_quadratic_saddle(a, Vector::zeros(2), 1.0, ConvexSet::Free { dim: 2 }, n, 1.0, 11).expect("noisy quadratic")
}

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;

fn median_over_seeds(p: &QuadraticSaddle, config: &SolverConfig) -> f64 {
    let opts = RunOptions { x0: Some(reference_start()), ..RunOptions::default() };
    let values: Vec<f64> = SEEDS
        .into_par_iter()
        .map(|s| {
            let r = run(p, &config.clone().with_seed(s), &opts).expect("run");
            r.averaged_stationarity().expect("stationarity recorded")
        })
        .collect();
    median(values)
}

fn noise_floor() -> Outcome {
    // Step sizes of the noise-free problem; the noisy instance's own
    // worst-case constants make them vanishingly small.
    let (gamma, lambda, eta) = theorem1_steps(&reference_quadratic().constants().expect("analytic"));
    let p = noisy_quadratic(1000);
    let medians: Vec<f64> = [8usize, 32, 128]
        .iter()
        .map(|&b| median_over_seeds(&p, &SolverConfig::rsgda(gamma, lambda, eta, b, 20_000)))
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    Outcome::new(
        decreasing,
        format!("medians B=8: {:.4e}, B=32: {:.4e}, B=128: {:.4e}", medians[0], medians[1], medians[2]),
    )
}

fn mvr_exactness() -> Outcome {
    let a = Mat::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0, 0.5]));
    let p = make_quadratic_saddle(
        a,
        Vector::from_column_slice(&[0.3, -0.2, 0.1]),
        1.0,
        ConvexSet::Free { dim: 3 },
        8,
        0.0,
        0,
    )
    .expect("noise-free quadratic");
    let config = SolverConfig::mvr_rsgda(0.05, 0.5, 0.5, 8.0, 4.0, 4.0, 3, 1000).with_seed(7);
    let errors = estimator_error_trace(&p, &config, &RunOptions::default()).expect("estimator trace");
    let worst = errors.iter().map(|(v, w)| v.max(*w)).fold(0.0, f64::max);

    // alpha = beta = 1: the estimator is the fresh batch gradient, bit for bit
    let noisy = noisy_quadratic(64);
    let m = noisy.manifold();
    let mut rng = rminmax::rng::derive(3, "acceptance_alpha_one");
    let mut exact = true;
    for _ in 0..100 {
        let x = m.random_point_with(&mut rng);
        let x_next = m.random_point_with(&mut rng);
        let y = noisy.y_set().sample(&mut rng);
        let y_next = noisy.y_set().sample(&mut rng);
        let batch = SampleBatch::draw(&mut rng, 64, 5);
        let prev = stoch_grads(&noisy, &x, &y, &SampleBatch::draw(&mut rng, 64, 5)).expect("grads");
        let fresh = stoch_grads(&noisy, &x_next, &y_next, &batch).expect("grads");
        let via_estimate = mvr_estimate(&noisy, &batch, &prev, &x, &y, &x_next, &y_next, 1.0, 1.0).expect("mvr");
        let g_old = stoch_grads(&noisy, &x, &y, &batch).expect("grads");
        let via_update = storm_update(m, &x, &x_next, &prev, &g_old, &fresh, 1.0, 1.0).expect("storm");
        exact &= via_estimate == fresh && via_update == fresh;
    }
    Outcome::new(
        worst <= 1e-10 && exact,
        format!("max estimator error {worst:.3e} over {} iterations, alpha=1 bit-exact: {exact}", errors.len()),
    )
}

fn head_to_head() -> Outcome {
    let budget = 1_000_000u64;
    let p = noisy_quadratic(10_000);
    let n = p.num_samples();
    let mut rsgda = SolverConfig::rsgda(0.05, 0.5, 0.1, 100, 0);
    rsgda.iterations = iterations_for_budget(&rsgda, n, budget);
    let mut mvr = SolverConfig::mvr_rsgda(0.05, 0.5, 0.5, 8.0, 512.0, 512.0, 100, 0);
    mvr.iterations = iterations_for_budget(&mvr, n, budget);
    let m_rsgda = median_over_seeds(&p, &rsgda);
    let m_mvr = median_over_seeds(&p, &mvr);
    Outcome::new(
        m_mvr < m_rsgda,
        format!(
            "median rsgda {m_rsgda:.4e} (T={}), mvr_rsgda {m_mvr:.4e} (T={}), budget {budget}",
            rsgda.iterations, mvr.iterations
        ),
    )
}

fn dro_smoke() -> Outcome {
    let p = make_dro(&synthetic_dro_samples(2048, 32, 5), 4).expect("dro");
    let config = SolverConfig::mvr_rsgda(1.0, 0.1, 0.5, 8.0, 512.0, 512.0, 512, 1000).with_seed(1);
    let opts = RunOptions {
        trace: TraceOptions { stationarity_every: 50, ..TraceOptions::default() },
        ..RunOptions::default()
    };
    match run(&p, &config, &opts) {
        Err(e) => Outcome::new(false, format!("run failed: {e}")),
        Ok(r) => {
            let f: Vec<f64> = r.trace.iter().map(|row| row.f).collect();
            let w = f.len() / 10;
            let head = f[..w].iter().sum::<f64>() / w as f64;
            let tail = f[f.len() - w..].iter().sum::<f64>() / w as f64;
            let finite = f.iter().all(|v| v.is_finite());
            Outcome::new(
                finite && f.len() == 1000 && tail < head,
                format!("{} iterations, f window means {head:.4} -> {tail:.4}", f.len()),
            )
        }
    }
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).expect("write config");
    path
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let configs = [
        (
            "rgda.json",
            r#"{"version": 1,
                "problem": {"kind": "quadratic_saddle", "a": [[2, 0], [0, 1]], "mu": 1.0},
                "solver": {"algorithm": "rgda", "gamma": 0.0005, "lambda": 0.04,
                           "eta": {"constant": {"value": 1.0}}, "iterations": 500, "seed": 4},
                "trace": {"stationarity_every": 1, "lyapunov": true, "estimator_error": true,
                          "inner_tol": 1e-8, "max_inner": 10000}}"#,
        ),
        (
            "rsgda.json",
            r#"{"version": 1,
                "problem": {"kind": "quadratic_saddle", "a": [[2, 0.5], [0, 1]], "mu": 1.0,
                            "samples": 200, "noise": 0.5, "seed": 3},
                "solver": {"algorithm": "rsgda", "gamma": 0.01, "lambda": 0.2,
                           "eta": {"constant": {"value": 0.5}}, "iterations": 400, "batch_size": 8, "seed": 9}}"#,
        ),
        (
            "dro.json",
            r#"{"version": 1,
                "problem": {"kind": "dro", "cols": 2, "dim": 8, "synthetic": {"n": 128, "seed": 2}},
                "solver": {"algorithm": "mvr_rsgda", "gamma": 0.5, "lambda": 0.1,
                           "eta": {"schedule": {"b": 0.5, "m": 8}}, "c1": 512, "c2": 512,
                           "iterations": 200, "batch_size": 16, "seed": 5},
                "trace": {"stationarity_every": 20, "lyapunov": false, "estimator_error": false,
                          "inner_tol": 1e-8, "max_inner": 2000}}"#,
        ),
    ];
    let mut identical = 0;
    let mut mismatched = Vec::new();
    for (name, body) in configs {
        let path = write_config(dir.path(), name, body);
        let traces: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("{name}.{k}"));
                cmd_run(&path, Some(&out)).expect("run");
                fs::read(out.join("trace.csv")).expect("trace")
            })
            .collect();
        if traces[0] == traces[1] && !traces[0].is_empty() {
            identical += 1;
        } else {
            mismatched.push(name);
        }
    }
    Outcome::new(mismatched.is_empty(), format!("{identical}/3 configs byte-identical, mismatched {mismatched:?}"))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 12] = [
        ("manifold laws", manifold_laws, Duration::from_secs(10)),
        ("projection suite", projections, Duration::from_secs(5)),
        ("gradient consistency", gradients, Duration::from_secs(30)),
        ("oracle identity", oracle_identity, Duration::from_secs(60)),
        ("lipschitz probe", lipschitz, Duration::from_secs(60)),
        ("lyapunov monotonicity", lyapunov, Duration::from_secs(60)),
        ("deterministic rate", deterministic_rate, Duration::from_secs(120)),
        ("noise floor in B", noise_floor, Duration::from_secs(300)),
        ("mvr estimator exactness", mvr_exactness, Duration::from_secs(60)),
        ("equal-budget head-to-head", head_to_head, Duration::from_secs(600)),
        ("dro smoke run", dro_smoke, Duration::from_secs(300)),
        ("determinism", determinism, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = outcome.pass && in_time;
        failures += usize::from(!pass);
        println!(
            "{} criterion {:>2} {}: {} [{:.1}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
