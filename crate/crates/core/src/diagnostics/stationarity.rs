use crate::manifold::ManifoldPoint;
use crate::problems::{grad_y, rgrad_x, MinimaxProblem};
use crate::Vector;

/// Result of [`estimate_grad_phi`].
#[derive(Clone, Debug, PartialEq)]
pub struct StationarityEstimate {
    /// `|grad_x f(x, y_hat)|`.
    pub norm: f64,
    pub y_hat: Vector,
    pub iterations: usize,
    /// False when `max_inner` ran out before the tolerance was met.
    pub converged: bool,
}

/// Inner ascent step: `1 / L22` when the problem knows its y-smoothness,
/// otherwise the fallback.
pub fn inner_step<P: MinimaxProblem + ?Sized>(p: &P, fallback: f64) -> f64 {
    p.y_smoothness().map(|l| 1.0 / l).unwrap_or(fallback)
}

/// Projected gradient ascent on `y -> f(x, y)` from `y0` until
/// `|P(y + s grad_y f) - y| <= inner_tol`, then `|grad_x f(x, y_hat)|`.
pub fn estimate_grad_phi<P: MinimaxProblem + ?Sized>(
    p: &P,
    x: &ManifoldPoint,
    y0: &Vector,
    step: f64,
    inner_tol: f64,
    max_inner: usize,
) -> StationarityEstimate {
    let set = p.y_set();
    let mut y = set.project(y0).unwrap_or_else(|_| set.center());
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_inner {
        let g = grad_y(p, x, &y);
        let next = match set.project(&(&y + g * step)) {
            Ok(n) => n,
            Err(_) => break,
        };
        let moved = (&next - &y).norm();
        y = next;
        iterations += 1;
        if moved <= inner_tol {
            converged = true;
            break;
        }
    }
    StationarityEstimate { norm: rgrad_x(p, x, &y).norm(), y_hat: y, iterations, converged }
}
