use rand::Rng;
use serde_json::json;

use super::CheckReport;
use crate::error::{Error, Result};
use crate::manifold::TangentVector;
use crate::problems::{grad_y, rgrad_x, stoch_grads, MinimaxProblem, ProblemConstants, SampleBatch};

/// Floor on `|u|` in ratio probes.
pub const RATIO_FLOOR: f64 = 1e-8;

/// Relative slack on the Lipschitz inequalities.
pub const LIPSCHITZ_SLACK: f64 = 1e-6;

fn random_step<R: Rng + ?Sized>(m: &crate::Manifold, x: &crate::ManifoldPoint, rng: &mut R) -> TangentVector {
    let u = m.random_tangent_with(x, rng, 1.0);
    let n = u.norm();
    if n == 0.0 {
        return u;
    }
    // lengths spread log-uniformly over [1e-9, 1]
    let len = 10f64.powf(rng.random_range(-9.0..=0.0));
    u.scale(len / n)
}

/// Samples `n_pairs` points `x1` and steps `u` with `x2 = R_{x1}(u)` and
/// checks `|y*(x1) - y*(x2)| <= kappa |u|` and
/// `|grad Phi(x1) - T_{x2 -> x1} grad Phi(x2)| <= g |u|`, each with slack
/// `1 + LIPSCHITZ_SLACK`. The measured value is the larger of the two worst
/// ratios divided by their constants.
pub fn lipschitz_probe<P: MinimaxProblem + ?Sized, R: Rng + ?Sized>(
    p: &P,
    kappa: f64,
    g: f64,
    n_pairs: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let m = p.manifold();
    let mut worst_y: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    for _ in 0..n_pairs {
        let x1 = m.random_point_with(rng);
        let u = random_step(m, &x1, rng);
        let x2 = m.retract(&x1, &u)?;
        let unsupported = || Error::Unsupported(format!("{} has no y* oracle", p.name()));
        let (y1, y2) = (p.y_star(&x1).ok_or_else(unsupported)?, p.y_star(&x2).ok_or_else(unsupported)?);
        let (g1, g2) = (p.grad_phi(&x1).ok_or_else(unsupported)?, p.grad_phi(&x2).ok_or_else(unsupported)?);
        let back = m.transport_to(&x2, &x1, &g2)?;
        let len = u.norm().max(RATIO_FLOOR);
        worst_y = worst_y.max((y1 - y2).norm() / len);
        worst_g = worst_g.max((&g1 - &back).norm() / len);
    }
    let measured = (worst_y / kappa).max(worst_g / g);
    Ok(CheckReport::at_most("lipschitz.lemma1", measured, 1.0 + LIPSCHITZ_SLACK, n_pairs as u64).with_details(json!({
        "y_star_ratio": worst_y,
        "kappa": kappa,
        "grad_phi_ratio": worst_g,
        "g": g,
    })))
}

/// Smallest strong-concavity modulus seen on random chords `y1, y2` of `Y`:
/// `2 (f(y1) + <grad_y f(y1), y2 - y1> - f(y2)) / |y2 - y1|^2`. Passes when
/// it is at least the declared `mu` up to `tol`.
pub fn concavity_probe<P: MinimaxProblem + ?Sized, R: Rng + ?Sized>(
    p: &P,
    n_chords: usize,
    tol: f64,
    rng: &mut R,
) -> CheckReport {
    let m = p.manifold();
    let set = p.y_set();
    let mut worst = f64::INFINITY;
    for _ in 0..n_chords {
        let x = m.random_point_with(rng);
        let (y1, y2) = (set.sample(rng), set.sample(rng));
        let d = &y2 - &y1;
        let dd = d.norm_squared();
        if dd < 1e-12 {
            continue;
        }
        let gap = p.value(&x, &y1) + grad_y(p, &x, &y1).dot(&d) - p.value(&x, &y2);
        worst = worst.min(2.0 * gap / dd);
    }
    let mu = p.mu();
    let mut r = CheckReport::at_most(format!("concavity.{}", p.name()), mu - worst, tol * mu.max(1.0), n_chords as u64);
    r.details = json!({ "declared_mu": mu, "observed_min_modulus": worst });
    r
}

/// Sampled lower bounds on the problem constants. Every entry is a maximum
/// (for `mu`, a minimum) of observed ratios, so the true constants can only
/// be worse; use analytic constants when the problem provides them.
pub fn estimate_constants<P: MinimaxProblem + ?Sized, R: Rng + ?Sized>(
    p: &P,
    n_pairs: usize,
    rng: &mut R,
) -> Result<ProblemConstants> {
    let m = p.manifold();
    let set = p.y_set();
    let mut c = ProblemConstants { mu: f64::INFINITY, l11: 0.0, l12: 0.0, l21: 0.0, l22: 0.0, l: 0.0, sigma: 0.0 };
    let n = p.num_samples();
    for _ in 0..n_pairs {
        let x1 = m.random_point_with(rng);
        let u = random_step(m, &x1, rng);
        let x2 = m.retract(&x1, &u)?;
        let (y1, y2) = (set.sample(rng), set.sample(rng));
        let du = u.norm().max(RATIO_FLOOR);
        let dy = (&y2 - &y1).norm().max(RATIO_FLOOR);

        let gx11 = rgrad_x(p, &x1, &y1);
        let gx21 = rgrad_x(p, &x2, &y1);
        let gx12 = rgrad_x(p, &x1, &y2);
        let gy11 = grad_y(p, &x1, &y1);
        let gy21 = grad_y(p, &x2, &y1);
        let gy12 = grad_y(p, &x1, &y2);

        let back = m.transport_to(&x2, &x1, &gx21)?;
        c.l11 = c.l11.max((&gx11 - &back).norm() / du);
        c.l12 = c.l12.max((&gx11 - &gx12).norm() / dy);
        c.l21 = c.l21.max((&gy11 - &gy21).norm() / du);
        c.l22 = c.l22.max((&gy11 - &gy12).norm() / dy);
        let d = &y2 - &y1;
        if d.norm_squared() > 1e-12 {
            let gap = p.value(&x1, &y1) + gy11.dot(&d) - p.value(&x1, &y2);
            c.mu = c.mu.min(2.0 * gap / d.norm_squared());
        }
        let curv = p.value(&x2, &y1) - p.value(&x1, &y1) - m.inner(&x1, &gx11, &u);
        c.l = c.l.max(2.0 * curv.abs() / (du * du));
        let i = rng.random_range(0..n);
        let gi = stoch_grads(p, &x1, &y1, &SampleBatch::new(vec![i], n)?)?;
        let dev = ((&gi.v - &gx11).norm().powi(2) + (&gi.w - &gy11).norm_squared()).sqrt();
        c.sigma = c.sigma.max(dev);
    }
    if !c.mu.is_finite() {
        c.mu = p.mu();
    }
    Ok(c)
}

/// Monte Carlo bias and mean-squared error of size-`batch` gradient
/// estimates at one random point, against the full finite-sum gradient.
/// Returns `(|mean estimate - exact|, mean |estimate - exact|^2)`.
pub fn batch_noise<P: MinimaxProblem + ?Sized, R: Rng + ?Sized>(
    p: &P,
    batch: usize,
    draws: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let m = p.manifold();
    let x = m.random_point_with(rng);
    let y = p.y_set().sample(rng);
    let exact_v = rgrad_x(p, &x, &y);
    let exact_w = grad_y(p, &x, &y);
    let n = p.num_samples();
    let mut sum_v = exact_v.matrix() * 0.0;
    let mut sum_w = &exact_w * 0.0;
    let mut mse = 0.0;
    for _ in 0..draws {
        let b = SampleBatch::draw(rng, n, batch);
        let g = stoch_grads(p, &x, &y, &b)?;
        mse += (&g.v - &exact_v).norm().powi(2) + (&g.w - &exact_w).norm_squared();
        sum_v += g.v.matrix();
        sum_w += &g.w;
    }
    let k = draws as f64;
    let bias = ((sum_v / k - exact_v.matrix()).norm_squared() + (sum_w / k - exact_w).norm_squared()).sqrt();
    Ok((bias, mse / k))
}
