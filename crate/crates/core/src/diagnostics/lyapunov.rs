use serde_json::json;

use super::trace::TraceRow;
use super::CheckReport;
use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;
use crate::problems::{MinimaxProblem, ProblemConstants};
use crate::solvers::{validate_config, Algorithm, SolverConfig};
use crate::Vector;

/// Allowed per-step increase of the Lyapunov value.
pub const LYAPUNOV_SLACK: f64 = 1e-10;

/// Weight of the tracking term, `6 gamma L~ / (lambda mu)`.
pub fn lyapunov_weight(gamma: f64, lambda: f64, c: &ProblemConstants) -> f64 {
    6.0 * gamma * c.l_tilde() / (lambda * c.mu)
}

/// `Phi(x) + w |y - y*(x)|^2` for problems with an oracle.
pub fn lyapunov_value<P: MinimaxProblem + ?Sized>(p: &P, x: &ManifoldPoint, y: &Vector, weight: f64) -> Option<f64> {
    let ys = p.y_star(x)?;
    let phi = p.phi(x)?;
    Some(phi + weight * (y - ys).norm_squared())
}

/// Asserts `Lambda_{t+1} <= Lambda_t + LYAPUNOV_SLACK` along a deterministic
/// RGDA trace recorded with the Lyapunov column. The report lists the step
/// conditions the configuration violates, if any.
pub fn lyapunov_trace<P: MinimaxProblem + ?Sized>(
    p: &P,
    rows: &[TraceRow],
    config: &SolverConfig,
    constants: &ProblemConstants,
) -> Result<CheckReport> {
    if p.y_star(&p.manifold().random_point(0)).is_none() {
        return Err(Error::Unsupported(format!("{} has no y* oracle", p.name())));
    }
    if config.algorithm != Algorithm::Rgda {
        return Err(Error::Unsupported("the Lyapunov decrease is only asserted for deterministic RGDA".into()));
    }
    let values: Vec<f64> = rows
        .iter()
        .map(|r| r.lyapunov)
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Unsupported("trace was recorded without the Lyapunov column".into()))?;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_t = 0;
    let mut violations = 0u64;
    for (k, w) in values.windows(2).enumerate() {
        let inc = w[1] - w[0];
        if inc > worst {
            worst = inc;
            worst_t = rows[k].t;
        }
        if inc > LYAPUNOV_SLACK {
            violations += 1;
        }
    }
    let warnings: Vec<String> = validate_config(constants, config).into_iter().map(|w| w.condition).collect();
    let measured = if values.len() < 2 { 0.0 } else { worst };
    Ok(CheckReport::at_most("lyapunov.rgda", measured, LYAPUNOV_SLACK, values.len() as u64).with_details(json!({
        "worst_step": worst_t,
        "violations": violations,
        "violated_conditions": warnings,
    })))
}
