use crate::constraint::ConvexSet;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, TANGENT_TOL};
use crate::problems::{stoch_grads, GradientPair, MinimaxProblem, SampleBatch};
use crate::Vector;

/// `eta_t = b / (m + t)^{1/3}`.
pub fn schedule_eta(t: usize, b: f64, m: f64) -> f64 {
    b / (m + t as f64).cbrt()
}

/// Iterate of a solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: usize,
    pub x: ManifoldPoint,
    pub y: Vector,
}

/// One descent-ascent update:
/// `x+ = R_x(-gamma eta v)`, `y~ = P_Y(y + lambda w)`, `y+ = y + eta (y~ - y)`.
pub fn gda_step(
    manifold: &Manifold,
    y_set: &ConvexSet,
    state: &SolverState,
    grads: &GradientPair,
    gamma: f64,
    lambda: f64,
    eta: f64,
) -> Result<SolverState> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
    }
    let res = manifold.tangent_residual(&state.x, grads.v.matrix());
    if !(res <= TANGENT_TOL * (1.0 + grads.v.norm())) {
        return Err(Error::Domain(format!("x-gradient estimate is not tangent at x (residual {res:e})")));
    }
    let step = grads.v.scale(-gamma * eta);
    let x = manifold.reorthonormalize(manifold.retract(&state.x, &step)?);
    let y_tilde = y_set.project(&(&state.y + &grads.w * lambda))?;
    let y = if eta == 1.0 { y_tilde } else { &state.y + (y_tilde - &state.y) * eta };
    Ok(SolverState { t: state.t + 1, x, y })
}

/// Recursive momentum estimator update
/// `v+ = g_new.v + (1 - alpha) T_{x -> x+}(v - g_old.v)` and
/// `w+ = g_new.w + (1 - beta) (w - g_old.w)`, where `g_old` and `g_new`
/// are gradients of the same mini-batch at the old and new iterate.
/// `alpha = 1` returns the fresh gradient exactly.
#[allow(clippy::too_many_arguments)]
pub fn storm_update(
    manifold: &Manifold,
    x: &ManifoldPoint,
    x_next: &ManifoldPoint,
    prev: &GradientPair,
    g_old: &GradientPair,
    g_new: &GradientPair,
    alpha: f64,
    beta: f64,
) -> Result<GradientPair> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Domain(format!("momentum weights must lie in [0, 1], got alpha = {alpha}, beta = {beta}")));
    }
    let v = if alpha == 1.0 {
        g_new.v.clone()
    } else {
        let correction = &prev.v - &g_old.v;
        let moved = manifold.transport_to(x, x_next, &correction)?;
        &g_new.v + &moved.scale(1.0 - alpha)
    };
    let w = if beta == 1.0 { g_new.w.clone() } else { &g_new.w + (&prev.w - &g_old.w) * (1.0 - beta) };
    Ok(GradientPair { v, w })
}

/// Evaluates one mini-batch at `(x, y)` and `(x_next, y_next)` and applies
/// [`storm_update`]. Both evaluations share `batch`.
#[allow(clippy::too_many_arguments)]
pub fn mvr_estimate<P: MinimaxProblem + ?Sized>(
    problem: &P,
    batch: &SampleBatch,
    prev: &GradientPair,
    x: &ManifoldPoint,
    y: &Vector,
    x_next: &ManifoldPoint,
    y_next: &Vector,
    alpha: f64,
    beta: f64,
) -> Result<GradientPair> {
    let g_new = stoch_grads(problem, x_next, y_next, batch)?;
    if alpha == 1.0 && beta == 1.0 {
        return Ok(g_new);
    }
    let g_old = stoch_grads(problem, x, y, batch)?;
    storm_update(problem.manifold(), x, x_next, prev, &g_old, &g_new, alpha, beta)
}
