use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rminmax");

fn rminmax(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(cwd).output().expect("spawn rminmax")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const QUAD: &str = r#"{
    "version": 1,
    "problem": {"kind": "quadratic_saddle", "a": [[2, 0], [0, 1]], "mu": 1.0,
                "samples": 100, "noise": 0.5, "seed": 1},
    "solver": {"algorithm": "rsgda", "gamma": 0.01, "lambda": 0.2,
               "eta": {"constant": {"value": 0.5}}, "iterations": 200, "batch_size": 4, "seed": 2},
    "compare": {"solvers": [
        {"algorithm": "rsgda", "gamma": 0.05, "lambda": 0.5, "eta": {"constant": {"value": 0.1}},
         "iterations": 1, "batch_size": 10},
        {"algorithm": "mvr_rsgda", "gamma": 0.05, "lambda": 0.5, "eta": {"schedule": {"b": 0.5, "m": 8}},
         "c1": 512, "c2": 512, "iterations": 1, "batch_size": 10}
    ], "seeds": 2}
}"#;

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "q.json", QUAD);
    let out = rminmax(&["run", "--config", cfg.to_str().unwrap(), "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace = fs::read_to_string(dir.path().join("o/trace.csv")).unwrap();
    assert!(trace.starts_with("t,eta,f,"));
    assert_eq!(trace.lines().count(), 201);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["algorithm"], "rsgda");
    assert_eq!(summary["samples"], 800);
    assert_eq!(summary["constants_source"], "analytic");
    assert!(summary["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q.json", QUAD);
    for o in ["a", "b"] {
        assert_eq!(code(&rminmax(&["run", "--config", "q.json", "--out", o], dir.path())), 0);
    }
    let a = fs::read(dir.path().join("a/trace.csv")).unwrap();
    let b = fs::read(dir.path().join("b/trace.csv")).unwrap();
    assert_eq!(a, b);
    let strip = |p: &str| {
        let mut v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(p)).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_seconds");
        v
    };
    assert_eq!(strip("a/summary.json"), strip("b/summary.json"));
}

#[test]
fn missing_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "dro.json",
        r#"{"version": 1,
            "problem": {"kind": "dro", "cols": 1, "dim": 3, "dataset": "nowhere.csv"},
            "solver": {"algorithm": "rgda", "gamma": 0.01, "lambda": 0.1,
                       "eta": {"constant": {"value": 1.0}}, "iterations": 5}}"#,
    );
    let out = rminmax(&["run", "--config", "dro.json"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.csv"));
}

#[test]
fn dataset_paths_resolve_against_config_dir() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("cfg");
    fs::create_dir(&sub).unwrap();
    fs::write(sub.join("data.csv"), "1,0,0\n0,1,0\n0,0,1\n0.5,0.5,0\n").unwrap();
    write(
        &sub,
        "dro.json",
        r#"{"version": 1,
            "problem": {"kind": "dro", "cols": 1, "dim": 3, "dataset": "data.csv"},
            "solver": {"algorithm": "rgda", "gamma": 0.01, "lambda": 0.1,
                       "eta": {"constant": {"value": 1.0}}, "iterations": 5},
            "trace": {"stationarity_every": 0, "lyapunov": false, "estimator_error": false,
                      "inner_tol": 1e-8, "max_inner": 100}}"#,
    );
    let out = rminmax(&["run", "--config", "cfg/dro.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["constants_source"], "estimated");
}

#[test]
fn malformed_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", "{ not json");
    write(dir.path(), "extra.json", &QUAD.replacen("\"version\": 1,", "\"version\": 1, \"typo\": 0,", 1));
    write(dir.path(), "neg.json", &QUAD.replace("\"gamma\": 0.01", "\"gamma\": -1"));
    for f in ["bad.json", "extra.json", "neg.json", "absent.json"] {
        assert_eq!(code(&rminmax(&["run", "--config", f], dir.path())), 2, "{f}");
    }
    assert_eq!(code(&rminmax(&["run"], dir.path())), 2);
    assert_eq!(code(&rminmax(&["frobnicate"], dir.path())), 2);
}

#[test]
fn divergent_run_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "blow.json", &QUAD.replace("\"lambda\": 0.2", "\"lambda\": 50.0"));
    let out = rminmax(&["run", "--config", "blow.json", "--out", "o"], dir.path());
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_filter_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = rminmax(&["check", "--filter", "projection", "--report", "r/report.json"], dir.path());
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("r/report.json")).unwrap()).unwrap();
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        for key in ["name", "pass", "measured", "tolerance", "samples", "details"] {
            assert!(r.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn sweep_over_t_fits_a_rate() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q.json", QUAD);
    let out = rminmax(
        &["sweep", "--config", "q.json", "--axis", "T", "--values", "50,200,800", "--seeds", "2", "--out", "s"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("value,seed,averaged_stationarity,samples"));
    assert_eq!(csv.lines().count(), 7);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("s/sweep_summary.json")).unwrap()).unwrap();
    assert!(summary["rate"]["slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn sweep_needs_two_values() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q.json", QUAD);
    let out = rminmax(&["sweep", "--config", "q.json", "--axis", "B", "--values", "4"], dir.path());
    assert_eq!(code(&out), 2);
    let out = rminmax(&["sweep", "--config", "q.json", "--axis", "B", "--values", "4,2.5"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn compare_reports_winner() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q.json", QUAD);
    let out = rminmax(&["compare", "--config", "q.json", "--budget", "20000", "--out", "c"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("c/compare_summary.json")).unwrap()).unwrap();
    assert_eq!(s["iterations"], serde_json::json!([2000, 1999]));
    assert_eq!(s["per_seed"].as_array().unwrap().len(), 2);
    for row in s["per_seed"].as_array().unwrap() {
        assert_eq!(row["samples"], serde_json::json!([20000, 20000]));
    }
}

#[test]
fn compare_needs_two_solvers() {
    let dir = tempfile::tempdir().unwrap();
    let single = QUAD.replace(
        r#",
        {"algorithm": "mvr_rsgda", "gamma": 0.05, "lambda": 0.5, "eta": {"schedule": {"b": 0.5, "m": 8}},
         "c1": 512, "c2": 512, "iterations": 1, "batch_size": 10}"#,
        "",
    );
    assert_ne!(single, QUAD);
    write(dir.path(), "one.json", &single);
    assert_eq!(code(&rminmax(&["compare", "--config", "one.json", "--budget", "1000"], dir.path())), 2);
}
