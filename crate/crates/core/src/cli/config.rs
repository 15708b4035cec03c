use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constraint::ConvexSet;
use crate::diagnostics::TraceOptions;
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;
use crate::problems::{
    load_matrix_csv, make_dro, make_quadratic_saddle, make_robust_regression, synthetic_dro_samples,
    synthetic_regression_data, MinimaxProblem, ProblemConstants, RegressionBall,
};
use crate::solvers::SolverConfig;
use crate::{Mat, Vector};

/// Schema version accepted by this build.
pub const CONFIG_VERSION: u32 = 1;

/// A seeded synthetic dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticData {
    pub n: usize,
    pub seed: u64,
    /// Target noise for regression data.
    #[serde(default)]
    pub noise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    QuadraticSaddle {
        /// Rows of the square coupling matrix.
        a: Vec<Vec<f64>>,
        /// Linear term; zero when absent.
        #[serde(default)]
        b: Option<Vec<f64>>,
        mu: f64,
        /// Free when absent.
        #[serde(default)]
        y_set: Option<ConvexSet>,
        #[serde(default = "one")]
        samples: usize,
        #[serde(default)]
        noise: f64,
        #[serde(default)]
        seed: u64,
    },
    Dro {
        /// Columns of the Stiefel variable; 1 gives the sphere.
        cols: usize,
        /// Ambient dimension of the samples.
        dim: usize,
        /// CSV with one sample per row.
        #[serde(default)]
        dataset: Option<PathBuf>,
        #[serde(default)]
        synthetic: Option<SyntheticData>,
    },
    RobustRegression {
        /// Input dimension `d`.
        dim: usize,
        /// Output dimension `r`.
        targets: usize,
        epsilon: f64,
        rho: f64,
        ball: RegressionBall,
        /// CSV rows of `d` inputs followed by `r` targets.
        #[serde(default)]
        dataset: Option<PathBuf>,
        #[serde(default)]
        synthetic: Option<SyntheticData>,
    },
}

fn one() -> usize {
    1
}

/// Solvers of a head-to-head comparison and its seed count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    /// `iterations` is ignored; each entry gets the shared sample budget.
    pub solvers: Vec<SolverConfig>,
    #[serde(default = "ten")]
    pub seeds: u64,
}

fn ten() -> u64 {
    10
}

/// One experiment: a problem, a solver and the diagnostics to record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
    #[serde(default)]
    pub trace: TraceOptions,
    /// Constants for step-size validation and the Lyapunov column.
    /// Analytic constants are used when absent, otherwise sampled lower
    /// bounds.
    #[serde(default)]
    pub constants: Option<ProblemConstants>,
    /// Initial point, column-major; drawn from the seed when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub compare: Option<CompareSpec>,
    /// Output directory when `--out` is not given.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Master seed; overrides `solver.seed`.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    /// Reads a config; relative dataset paths resolve against the config's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        match &mut cfg.problem {
            ProblemSpec::Dro { dataset: Some(p), .. } | ProblemSpec::RobustRegression { dataset: Some(p), .. }
                if p.is_relative() =>
            {
                *p = base.join(&*p);
            }
            _ => {}
        }
        Ok(cfg)
    }

    /// The solver configuration with the master seed applied.
    pub fn solver_config(&self) -> SolverConfig {
        let mut s = self.solver.clone();
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        s
    }

    pub fn build_problem(&self) -> Result<Box<dyn MinimaxProblem>> {
        build_problem(&self.problem)
    }

    /// Validated initial point, if configured.
    pub fn start(&self, problem: &dyn MinimaxProblem) -> Result<Option<ManifoldPoint>> {
        let Some(v) = &self.x0 else { return Ok(None) };
        let m = problem.manifold();
        let (r, c) = m.shape();
        if v.len() != r * c {
            return Err(Error::dim(r * c, v.len()));
        }
        m.point(Mat::from_column_slice(r, c, v)).map(Some)
    }
}

fn source_rows(dataset: &Option<PathBuf>, synthetic: &Option<SyntheticData>) -> Result<Option<Vec<Vec<f64>>>> {
    match (dataset, synthetic) {
        (Some(_), Some(_)) => Err(Error::Config("give either dataset or synthetic, not both".into())),
        (None, None) => Err(Error::Config("problem needs a dataset path or a synthetic spec".into())),
        (Some(path), None) => {
            if !path.exists() {
                return Err(Error::Config(format!("dataset {} does not exist", path.display())));
            }
            load_matrix_csv(path).map(Some)
        }
        (None, Some(_)) => Ok(None),
    }
}

fn check_width(rows: &[Vec<f64>], width: usize) -> Result<()> {
    match rows.iter().find(|r| r.len() != width) {
        Some(r) => Err(Error::Config(format!("dataset rows need {width} columns, found {}", r.len()))),
        None => Ok(()),
    }
}

pub fn build_problem(spec: &ProblemSpec) -> Result<Box<dyn MinimaxProblem>> {
    match spec {
        ProblemSpec::QuadraticSaddle { a, b, mu, y_set, samples, noise, seed } => {
            let d = a.len();
            if d == 0 || a.iter().any(|row| row.len() != d) {
                return Err(Error::Config("a must be a non-empty square matrix".into()));
            }
            let a = Mat::from_fn(d, d, |i, j| a[i][j]);
            let b = match b {
                Some(b) => Vector::from_column_slice(b),
                None => Vector::zeros(d),
            };
            let set = y_set.clone().unwrap_or(ConvexSet::Free { dim: d });
            Ok(Box::new(make_quadratic_saddle(a, b, *mu, set, *samples, *noise, *seed)?))
        }
        ProblemSpec::Dro { cols, dim, dataset, synthetic } => {
            let rows = match source_rows(dataset, synthetic)? {
                Some(rows) => rows,
                None => {
                    let s = synthetic.as_ref().expect("checked");
                    synthetic_dro_samples(s.n, *dim, s.seed)
                }
            };
            check_width(&rows, *dim)?;
            Ok(Box::new(make_dro(&rows, *cols)?))
        }
        ProblemSpec::RobustRegression { dim, targets, epsilon, rho, ball, dataset, synthetic } => {
            let data = match source_rows(dataset, synthetic)? {
                Some(rows) => {
                    check_width(&rows, dim + targets)?;
                    rows.into_iter()
                        .map(|mut r| {
                            let b = r.split_off(*dim);
                            (r, b)
                        })
                        .collect()
                }
                None => {
                    let s = synthetic.as_ref().expect("checked");
                    if targets > dim {
                        return Err(Error::Config(format!("targets ({targets}) must not exceed dim ({dim})")));
                    }
                    synthetic_regression_data(s.n, *dim, *targets, s.noise, s.seed)
                }
            };
            Ok(Box::new(make_robust_regression(&data, *targets, *epsilon, *rho, *ball)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUAD: &str = r#"{
        "version": 1,
        "problem": {"kind": "quadratic_saddle", "a": [[2, 0], [0, 1]], "mu": 1.0},
        "solver": {"algorithm": "rgda", "gamma": 0.01, "lambda": 0.1,
                   "eta": {"constant": {"value": 1.0}}, "iterations": 10}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(QUAD).unwrap();
        let p = cfg.build_problem().unwrap();
        assert_eq!(p.name(), "quadratic_saddle");
        assert_eq!(cfg.solver_config().iterations, 10);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let extra = QUAD.replace("\"version\": 1,", "\"version\": 1, \"bogus\": 3,");
        assert!(matches!(ExperimentConfig::from_json(&extra), Err(Error::Config(_))));
        let v2 = QUAD.replace("\"version\": 1", "\"version\": 2");
        assert!(matches!(ExperimentConfig::from_json(&v2), Err(Error::Config(_))));
    }

    #[test]
    fn missing_dataset_is_config_error() {
        let spec = ProblemSpec::Dro {
            cols: 1,
            dim: 3,
            dataset: Some(PathBuf::from("/nonexistent/data.csv")),
            synthetic: None,
        };
        assert!(matches!(build_problem(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn synthetic_regression() {
        let spec = ProblemSpec::RobustRegression {
            dim: 5,
            targets: 2,
            epsilon: 0.5,
            rho: 4.0,
            ball: RegressionBall::L2,
            dataset: None,
            synthetic: Some(SyntheticData { n: 20, seed: 1, noise: 0.1 }),
        };
        let p = build_problem(&spec).unwrap();
        assert_eq!(p.num_samples(), 20);
        assert_eq!(p.manifold().shape(), (5, 2));
    }
}
