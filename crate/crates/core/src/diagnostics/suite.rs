use rand::Rng as _;
use rayon::prelude::*;
use serde_json::json;

use super::gradcheck::gradient_suite;
use super::laws::{
    invariant_check, linearity_check, projection_check, reference_manifolds, retract_zero_check, rigidity_check,
    transport_isometry_report,
};
use super::lyapunov::lyapunov_trace;
use super::probes::{concavity_probe, lipschitz_probe};
use super::stationarity::{estimate_grad_phi, inner_step};
use super::trace::TraceOptions;
use super::CheckReport;
use crate::constraint::ConvexSet;
use crate::error::Result;
use crate::manifold::ManifoldPoint;
use crate::problems::{
    make_dro, make_quadratic_saddle, make_robust_regression, rgrad_x, synthetic_dro_samples, synthetic_regression_data,
    MinimaxProblem, QuadraticSaddle, RegressionBall,
};
use crate::rng::{self, Rng};
use crate::solvers::{run_rgda, theorem1_steps, RunOptions, SolverConfig};
use crate::{Mat, Vector};

/// `A = diag(2, 1)`, `b = 0`, `mu = 1`, `Y = R^2`: the oracle problem used
/// by the reference checks.
pub fn reference_quadratic() -> QuadraticSaddle {
    make_quadratic_saddle(
        Mat::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0])),
        Vector::zeros(2),
        1.0,
        ConvexSet::Free { dim: 2 },
        1,
        0.0,
        0,
    )
    .expect("valid reference problem")
}

/// Fixed start at angle 1 rad from the maximizer `e1` of `Phi`.
pub fn reference_start() -> ManifoldPoint {
    ManifoldPoint::from_matrix_unchecked(Mat::from_column_slice(2, 1, &[1f64.cos(), 1f64.sin()]))
}

/// RGDA with the largest step sizes of the deterministic guarantee for
/// [`reference_quadratic`].
pub fn reference_rgda_config(iterations: usize) -> SolverConfig {
    let c = reference_quadratic().constants().expect("analytic constants");
    let (gamma, lambda, eta) = theorem1_steps(&c);
    SolverConfig::rgda(gamma, lambda, eta, iterations)
}

/// Problems for the gradient-consistency and concavity checks: one
/// instance of each built-in kind.
pub fn gradient_problems() -> Vec<Box<dyn MinimaxProblem>> {
    let mut g = rng::derive(0, "gradient_problems");
    let a = Mat::from_fn(4, 4, |_, _| g.random_range(-1.0..1.0));
    let b = Vector::from_fn(4, |_, _| g.random_range(-1.0..1.0));
    let quad = make_quadratic_saddle(a, b, 1.5, ConvexSet::L2Ball { dim: 4, radius: 2.0 }, 16, 0.3, 1)
        .expect("valid quadratic");
    let dro = make_dro(&synthetic_dro_samples(64, 8, 2), 2).expect("valid dro");
    let reg = make_robust_regression(&synthetic_regression_data(32, 6, 2, 0.1, 3), 2, 0.5, 4.0, RegressionBall::L2)
        .expect("valid regression");
    vec![Box::new(quad), Box::new(dro), Box::new(reg)]
}

/// `grad_phi(x) = rgrad_x(x, y*(x))` within `1e-10`, and the inner-solve
/// stationarity estimate against the oracle within `1e-6` at
/// `inner_tol = 1e-9`, over `n` random points.
pub fn oracle_checks<P: MinimaxProblem + ?Sized, R: rand::Rng + ?Sized>(
    p: &P,
    n: usize,
    rng: &mut R,
) -> Result<Vec<CheckReport>> {
    let m = p.manifold();
    let mut identity: f64 = 0.0;
    let mut estimate: f64 = 0.0;
    let mut unconverged = 0u64;
    // half the 1/L22 step: on a free quadratic the full step lands on y* at once
    let step = 0.5 * inner_step(p, 0.1);
    for _ in 0..n {
        let x = m.random_point_with(rng);
        let (Some(ys), Some(gp)) = (p.y_star(&x), p.grad_phi(&x)) else {
            return Err(crate::Error::Unsupported(format!("{} has no oracle", p.name())));
        };
        identity = identity.max((gp.matrix() - rgrad_x(p, &x, &ys).matrix()).norm());
        let y0 = p.y_set().sample(rng);
        let est = estimate_grad_phi(p, &x, &y0, step, 1e-9, 100_000);
        unconverged += u64::from(!est.converged);
        estimate = estimate.max((est.norm - gp.norm()).abs());
    }
    Ok(vec![
        CheckReport::at_most("oracle.grad_phi", identity, 1e-10, n as u64),
        CheckReport::at_most("oracle.estimate", estimate, 1e-6, n as u64)
            .with_details(json!({ "inner_tol": 1e-9, "unconverged": unconverged })),
    ])
}

/// Runs deterministic RGDA on the reference problem from the reference
/// start with the Lyapunov column and checks its per-step decrease. With
/// `gamma_factor != 1` the step `gamma` is inflated, which voids the
/// guarantee.
pub fn lyapunov_reference(iterations: usize, gamma_factor: f64) -> Result<CheckReport> {
    let p = reference_quadratic();
    let constants = p.constants().expect("analytic constants");
    let mut config = reference_rgda_config(iterations);
    config.gamma *= gamma_factor;
    let opts = RunOptions {
        trace: TraceOptions { lyapunov: true, stationarity_every: 0, ..TraceOptions::default() },
        constants: Some(constants.clone()),
        x0: Some(reference_start()),
        y0: None,
    };
    let run = run_rgda(&p, &config, &opts)?;
    lyapunov_trace(&p, &run.trace, &config, &constants)
}

type CheckFn = fn(&mut Rng) -> Result<Vec<CheckReport>>;

/// A named group of checks with its own random stream.
pub struct CheckGroup {
    pub name: &'static str,
    run: CheckFn,
}

impl CheckGroup {
    /// Runs the group with the stream derived from `(seed, name)`. An error
    /// becomes a single failing report.
    pub fn run(&self, seed: u64) -> Vec<CheckReport> {
        let mut r = rng::derive(seed, self.name);
        match (self.run)(&mut r) {
            Ok(reports) => reports,
            Err(e) => vec![CheckReport {
                name: self.name.to_string(),
                pass: false,
                measured: f64::NAN,
                tolerance: f64::NAN,
                samples: 0,
                details: json!({ "error": e.to_string() }),
            }],
        }
    }
}

const TRIALS: usize = 1000;

/// Every check group of the suite, in report order.
pub fn check_groups() -> Vec<CheckGroup> {
    vec![
        CheckGroup {
            name: "manifold.retract_zero",
            run: |r| Ok(vec![retract_zero_check(&reference_manifolds(), 100, r)?]),
        },
        CheckGroup { name: "manifold.invariants", run: |r| Ok(vec![invariant_check(&reference_manifolds(), 200, r)?]) },
        CheckGroup {
            name: "manifold.retraction_rigidity",
            run: |r| Ok(vec![rigidity_check(&reference_manifolds(), 100, r)?]),
        },
        CheckGroup { name: "transport.linearity", run: |r| Ok(vec![linearity_check(&reference_manifolds(), 200, r)?]) },
        CheckGroup {
            name: "transport.isometry",
            run: |r| reference_manifolds().iter().map(|m| transport_isometry_report(m, TRIALS, r)).collect(),
        },
        CheckGroup {
            name: "projection",
            run: |r| {
                [
                    ConvexSet::L2Ball { dim: 7, radius: 1.5 },
                    ConvexSet::LinfBall { dim: 7, radius: 0.5 },
                    ConvexSet::Simplex { dim: 12 },
                ]
                .iter()
                .map(|s| projection_check(s, TRIALS, r))
                .collect()
            },
        },
        CheckGroup {
            name: "gradient",
            run: |r| {
                let mut out = Vec::new();
                for p in gradient_problems() {
                    out.extend(gradient_suite(p.as_ref(), 100, r)?);
                }
                Ok(out)
            },
        },
        CheckGroup {
            name: "concavity",
            run: |r| Ok(gradient_problems().iter().map(|p| concavity_probe(p.as_ref(), 200, 1e-8, r)).collect()),
        },
        CheckGroup { name: "oracle", run: |r| oracle_checks(&reference_quadratic(), 100, r) },
        CheckGroup {
            name: "lipschitz.lemma1",
            run: |r| {
                let p = reference_quadratic();
                let c = p.constants().expect("analytic constants");
                let kappa = p.a().singular_values().max() / p.mu();
                Ok(vec![lipschitz_probe(&p, kappa, c.g(), TRIALS, r)?])
            },
        },
        CheckGroup { name: "lyapunov.rgda", run: |_| Ok(vec![lyapunov_reference(10_000, 1.0)?]) },
        CheckGroup {
            name: "lyapunov.negative_control",
            run: |_| {
                let r = lyapunov_reference(10_000, 100.0)?;
                let mut out = CheckReport::at_most("lyapunov.negative_control", -r.measured, -r.tolerance, r.samples);
                out.details = json!({ "inflated_gamma_run": r });
                Ok(vec![out])
            },
        },
    ]
}

/// Runs the groups whose name contains `filter` (all when `None`) in
/// parallel and returns their reports in suite order.
pub fn run_checks(filter: Option<&str>, seed: u64) -> Vec<CheckReport> {
    let groups: Vec<CheckGroup> =
        check_groups().into_iter().filter(|g| filter.is_none_or(|f| g.name.contains(f))).collect();
    groups.par_iter().map(|g| g.run(seed)).collect::<Vec<_>>().concat()
}
