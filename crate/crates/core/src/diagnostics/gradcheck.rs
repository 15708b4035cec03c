use rand::Rng;
use serde_json::json;

use super::fit::log_log_slope;
use super::CheckReport;
use crate::manifold::{ManifoldPoint, TangentVector};
use crate::problems::{grad_y, rgrad_x, MinimaxProblem};
use crate::Vector;

/// Step sizes for the forward-difference check along the retraction.
pub const FD_STEPS: [f64; 5] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];

/// Number of times the steps may shrink by 10 before the check fails.
pub const REFINEMENTS: i32 = 2;

/// Accepted range of the log-log slope of the forward-difference error.
pub const FD_SLOPE_RANGE: (f64, f64) = (0.8, 1.2);

/// Forward-difference errors `|<rgrad, u> - (f(R_x(h u), y) - f(x, y)) / h|`
/// for each `h`.
pub fn fd_errors<P: MinimaxProblem + ?Sized>(
    p: &P,
    x: &ManifoldPoint,
    y: &Vector,
    u: &TangentVector,
    hs: &[f64],
) -> crate::Result<Vec<f64>> {
    let m = p.manifold();
    let slope = m.inner(x, &rgrad_x(p, x, y), u);
    let f0 = p.value(x, y);
    hs.iter()
        .map(|&h| {
            let xh = m.retract(x, &u.scale(h))?;
            Ok((slope - (p.value(&xh, y) - f0) / h).abs())
        })
        .collect()
}

/// Checks the Riemannian x-gradient against forward differences along the
/// retraction. The error of a correct gradient shrinks linearly in `h`, so
/// the log-log slope must fall in [`FD_SLOPE_RANGE`]. Errors that all sit at
/// rounding level (`f` flat in `x`) pass outright. When the slope misses
/// the range, the steps are divided by 10, at most [`REFINEMENTS`] times:
/// where the second directional derivative is small the linear regime
/// starts later, while a wrong gradient leaves a constant error at every
/// scale.
pub fn fd_check_rgrad<P: MinimaxProblem + ?Sized>(
    p: &P,
    x: &ManifoldPoint,
    y: &Vector,
    u: &TangentVector,
    hs: &[f64],
) -> crate::Result<CheckReport> {
    let name = format!("gradient.x.{}", p.name());
    let errs = fd_errors(p, x, y, u, hs)?;
    let floor = 1e-12 * (1.0 + p.value(x, y).abs());
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    if worst <= floor {
        return Ok(CheckReport::at_most(name, worst, floor, hs.len() as u64)
            .with_details(json!({ "flat": true, "errors": errs })));
    }
    let (lo, hi) = FD_SLOPE_RANGE;
    let slope = log_log_slope(hs, &errs)?;
    if (lo..=hi).contains(&slope) {
        return Ok(CheckReport::within(name, slope, lo, hi, hs.len() as u64).with_details(json!({ "errors": errs })));
    }
    let mut history = vec![json!({ "steps": hs, "errors": errs, "slope": slope })];
    let mut last = slope;
    for level in 1..=REFINEMENTS {
        let scale = 10f64.powi(-level);
        let steps: Vec<f64> = hs.iter().map(|h| h * scale).collect();
        let errs = fd_errors(p, x, y, u, &steps)?;
        if errs.iter().any(|e| *e <= 0.0) {
            break;
        }
        last = log_log_slope(&steps, &errs)?;
        history.push(json!({ "steps": steps, "errors": errs, "slope": last }));
        if (lo..=hi).contains(&last) {
            break;
        }
    }
    let evaluations = (history.len() * hs.len()) as u64;
    Ok(CheckReport::within(name, last, lo, hi, evaluations).with_details(json!({ "levels": history })))
}

/// Largest central-difference error of the Euclidean y-gradient over all
/// coordinates.
pub fn fd_error_grad_y<P: MinimaxProblem + ?Sized>(p: &P, x: &ManifoldPoint, y: &Vector, h: f64) -> f64 {
    let g = grad_y(p, x, y);
    let mut worst: f64 = 0.0;
    let mut yp = y.clone();
    for i in 0..y.len() {
        yp[i] = y[i] + h;
        let fp = p.value(x, &yp);
        yp[i] = y[i] - h;
        let fm = p.value(x, &yp);
        yp[i] = y[i];
        worst = worst.max((g[i] - (fp - fm) / (2.0 * h)).abs());
    }
    worst
}

/// Tolerance on the y-gradient central-difference error.
pub const FD_Y_TOL: f64 = 1e-5;

/// Gradient consistency over `n_points` random `(x, y, u)`: the x-slope
/// check at every point and the worst y-gradient error.
pub fn gradient_suite<P: MinimaxProblem + ?Sized, R: Rng + ?Sized>(
    p: &P,
    n_points: usize,
    rng: &mut R,
) -> crate::Result<Vec<CheckReport>> {
    let m = p.manifold();
    let (lo, hi) = FD_SLOPE_RANGE;
    let mut slopes = Vec::with_capacity(n_points);
    let mut failures = Vec::new();
    let mut worst_y: f64 = 0.0;
    for k in 0..n_points {
        let x = m.random_point_with(rng);
        let y = p.y_set().sample(rng);
        let u = m.random_tangent_with(&x, rng, 1.0);
        let n = u.norm();
        if n == 0.0 {
            continue;
        }
        let u = u.scale(1.0 / n);
        let r = fd_check_rgrad(p, &x, &y, &u, &FD_STEPS)?;
        if !r.pass {
            failures.push(json!({ "point": k, "measured": r.measured }));
        }
        if r.details.get("flat").is_none() {
            slopes.push(r.measured);
        }
        worst_y = worst_y.max(fd_error_grad_y(p, &x, &y, 1e-5));
    }
    let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let dev = slopes.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let mut x_report = CheckReport::at_most(format!("gradient.x.{}", p.name()), dev, (hi - lo) / 2.0, n_points as u64)
        .with_details(json!({ "slope_min": min, "slope_max": max, "failures": failures }));
    x_report.pass = failures.is_empty();
    let y_report = CheckReport::at_most(format!("gradient.y.{}", p.name()), worst_y, FD_Y_TOL, n_points as u64);
    Ok(vec![x_report, y_report])
}
