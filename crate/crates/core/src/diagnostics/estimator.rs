use crate::error::{Error, Result};
use crate::problems::MinimaxProblem;
use crate::solvers::{run, RunOptions, SolverConfig};

/// Runs the solver with estimator-error recording and returns
/// `(|v_t - grad_x f(x_t, y_t)|, |w_t - grad_y f(x_t, y_t)|)` for every `t`,
/// measured against the full finite-sum gradients.
pub fn estimator_error_trace<P: MinimaxProblem + ?Sized>(
    p: &P,
    config: &SolverConfig,
    opts: &RunOptions,
) -> Result<Vec<(f64, f64)>> {
    let mut opts = opts.clone();
    opts.trace.estimator_error = true;
    let result = run(p, config, &opts)?;
    result
        .trace
        .iter()
        .map(|r| match (r.v_error, r.w_error) {
            (Some(v), Some(w)) => Ok((v, w)),
            _ => Err(Error::Numeric(format!("missing estimator error at t = {}", r.t))),
        })
        .collect()
}
