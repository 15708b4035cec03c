use rand::Rng;
use serde_json::json;

use super::fit::log_log_slope;
use super::CheckReport;
use crate::constraint::ConvexSet;
use crate::error::Result;
use crate::manifold::{projection_rescaled_transport, Manifold, TangentVector};

/// Tolerance on transport linearity.
pub const LINEARITY_TOL: f64 = 1e-12;
/// Tolerance on inner-product and norm preservation by transport.
pub const ISOMETRY_TOL: f64 = 1e-10;
/// Tolerance on point and tangent invariants.
pub const INVARIANT_TOL: f64 = 1e-10;
/// Accepted retraction rigidity slope, `2 +- 0.1`.
pub const RIGIDITY_RANGE: (f64, f64) = (1.9, 2.1);

const RIGIDITY_STEPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// Manifolds exercised by the law suite.
pub fn reference_manifolds() -> Vec<Manifold> {
    let sphere = Manifold::sphere(5).expect("valid");
    let stiefel = Manifold::stiefel(6, 3).expect("valid");
    vec![
        Manifold::euclidean(3, 2).expect("valid"),
        Manifold::sphere(3).expect("valid"),
        sphere.clone(),
        stiefel.clone(),
        Manifold::stiefel(4, 4).expect("valid"),
        Manifold::stiefel(32, 4).expect("valid"),
        Manifold::product(vec![sphere, stiefel]).expect("valid"),
    ]
}

fn summary(mut v: Vec<f64>) -> serde_json::Value {
    if v.is_empty() {
        return json!(null);
    }
    v.sort_by(f64::total_cmp);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    json!({
        "mean": mean,
        "median": v[v.len() / 2],
        "p95": v[((v.len() - 1) as f64 * 0.95) as usize],
        "max": v[v.len() - 1],
    })
}

/// Inner-product behaviour of the vector transport on `m` over `n_trials`
/// random `(x, u, v, w)`.
///
/// Sphere and Euclidean transports must preserve inner products. Stiefel
/// and product transports must preserve norms; their inner-product
/// distortion is measured and reported, together with the distortion of
/// the projection-and-rescale transport for comparison.
pub fn transport_isometry_report<R: Rng + ?Sized>(m: &Manifold, n_trials: usize, rng: &mut R) -> Result<CheckReport> {
    let mut ip_err = Vec::with_capacity(n_trials);
    let mut norm_err = Vec::with_capacity(n_trials);
    let mut rescaled_ip_err = Vec::new();
    for _ in 0..n_trials {
        let x = m.random_point_with(rng);
        let u = m.random_tangent_with(&x, rng, 1.0);
        let v = m.random_tangent_with(&x, rng, 1.0);
        let w = m.random_tangent_with(&x, rng, 1.0);
        let y = m.retract(&x, &u)?;
        let tv = m.transport_to(&x, &y, &v)?;
        let tw = m.transport_to(&x, &y, &w)?;
        ip_err.push((m.inner(&y, &tv, &tw) - m.inner(&x, &v, &w)).abs());
        norm_err.push((tv.norm() - v.norm()).abs());
        if let Manifold::Stiefel { .. } = m {
            let pv = projection_rescaled_transport(y.matrix(), v.matrix());
            let pw = projection_rescaled_transport(y.matrix(), w.matrix());
            rescaled_ip_err.push((pv.dot(&pw) - v.matrix().dot(w.matrix())).abs());
        }
    }
    let worst = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let n = n_trials as u64;
    let report = match m {
        Manifold::Euclidean { .. } | Manifold::Sphere { .. } => {
            CheckReport::at_most(format!("transport.isometry.{}", m.kind()), worst(&ip_err), ISOMETRY_TOL, n)
        }
        _ => CheckReport::at_most(format!("transport.norm.{}", m.kind()), worst(&norm_err), ISOMETRY_TOL, n),
    };
    let mut details = json!({
        "shape": m.shape(),
        "inner_product_distortion": summary(ip_err),
        "norm_error": summary(norm_err),
    });
    if !rescaled_ip_err.is_empty() {
        details["projection_rescaled_distortion"] = summary(rescaled_ip_err);
    }
    Ok(report.with_details(details))
}

/// `retract(x, 0) = x` bit for bit.
pub fn retract_zero_check<R: Rng + ?Sized>(ms: &[Manifold], trials: usize, rng: &mut R) -> Result<CheckReport> {
    let mut mismatches = 0u64;
    for m in ms {
        for _ in 0..trials {
            let x = m.random_point_with(rng);
            if m.retract(&x, &m.zero_tangent())? != x {
                mismatches += 1;
            }
        }
    }
    Ok(CheckReport::at_most("manifold.retract_zero", mismatches as f64, 0.0, (ms.len() * trials) as u64))
}

/// Point residual of random points and retractions, and tangent residual of
/// projected vectors, on every manifold of `ms`.
pub fn invariant_check<R: Rng + ?Sized>(ms: &[Manifold], trials: usize, rng: &mut R) -> Result<CheckReport> {
    let mut worst_point: f64 = 0.0;
    let mut worst_tangent: f64 = 0.0;
    let mut worst_idempotence: f64 = 0.0;
    for m in ms {
        let (r, c) = m.shape();
        for _ in 0..trials {
            let x = m.random_point_with(rng);
            worst_point = worst_point.max(m.point_residual(x.matrix()));
            let z = crate::manifold::gaussian(r, c, rng) * 3.0;
            let u = m.project_tangent(&x, &z)?;
            worst_tangent = worst_tangent.max(m.tangent_residual(&x, u.matrix()));
            let again = m.project_tangent(&x, u.matrix())?;
            worst_idempotence = worst_idempotence.max((again.matrix() - u.matrix()).norm());
            let y = m.retract(&x, &u)?;
            worst_point = worst_point.max(m.point_residual(y.matrix()));
        }
    }
    let measured = worst_point.max(worst_tangent).max(worst_idempotence);
    Ok(CheckReport::at_most("manifold.invariants", measured, INVARIANT_TOL, (ms.len() * trials) as u64).with_details(
        json!({
            "point_residual": worst_point,
            "tangent_residual": worst_tangent,
            "projection_idempotence": worst_idempotence,
        }),
    ))
}

/// Log-log slope of `|R_x(h u) - (x + h u)|` for unit `u` and
/// `h in {1e-1, ..., 1e-4}`; the worst slope over trials and manifolds must
/// lie in [`RIGIDITY_RANGE`]. Euclidean components retract exactly and are
/// skipped.
pub fn rigidity_check<R: Rng + ?Sized>(ms: &[Manifold], trials: usize, rng: &mut R) -> Result<CheckReport> {
    let mut slopes = Vec::new();
    for m in ms.iter().filter(|m| !matches!(m, Manifold::Euclidean { .. })) {
        for _ in 0..trials {
            let x = m.random_point_with(rng);
            let u = m.random_tangent_with(&x, rng, 1.0);
            let u = u.scale(1.0 / u.norm());
            let devs: Vec<f64> = RIGIDITY_STEPS
                .iter()
                .map(|&h| {
                    let step = u.scale(h);
                    Ok((m.retract(&x, &step)?.matrix() - (x.matrix() + step.matrix())).norm())
                })
                .collect::<Result<_>>()?;
            slopes.push(log_log_slope(&RIGIDITY_STEPS, &devs)?);
        }
    }
    let dev = slopes.iter().map(|s| (s - 2.0).abs()).fold(0.0, f64::max);
    let (lo, hi) = RIGIDITY_RANGE;
    Ok(CheckReport::at_most("manifold.retraction_rigidity", dev, (hi - lo) / 2.0, slopes.len() as u64)
        .with_details(json!({ "slopes": summary(slopes) })))
}

/// `T(a v + b w) = a T v + b T w` for random `a, b in [-2, 2]`.
pub fn linearity_check<R: Rng + ?Sized>(ms: &[Manifold], trials: usize, rng: &mut R) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for m in ms {
        for _ in 0..trials {
            let x = m.random_point_with(rng);
            let u = m.random_tangent_with(&x, rng, 1.0);
            let v = m.random_tangent_with(&x, rng, 1.0);
            let w = m.random_tangent_with(&x, rng, 1.0);
            let (a, b) = (rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0));
            let combo = TangentVector::from_matrix_unchecked(v.matrix() * a + w.matrix() * b);
            let lhs = m.transport(&x, &u, &combo)?;
            let tv = m.transport(&x, &u, &v)?;
            let tw = m.transport(&x, &u, &w)?;
            worst = worst.max((lhs.matrix() - (tv.matrix() * a + tw.matrix() * b)).norm());
        }
    }
    Ok(CheckReport::at_most("transport.linearity", worst, LINEARITY_TOL, (ms.len() * trials) as u64))
}

/// Projection laws on `n` random inputs: membership within `1e-10`,
/// idempotence within `1e-12`, non-expansiveness on random pairs, the
/// variational inequality `<a - P(a), z - P(a)> <= 1e-10` for feasible `z`,
/// and for the simplex the sum within `1e-12` and entries `>= -1e-15`.
/// The measured value is the number of violations.
pub fn projection_check<R: Rng + ?Sized>(set: &ConvexSet, n: usize, rng: &mut R) -> Result<CheckReport> {
    let d = set.dim();
    let spread = set.diameter().unwrap_or(2.0).max(1.0) * 2.0;
    let draw = |rng: &mut R| crate::manifold::gaussian(d, 1, rng).column(0) * spread;
    let mut violations = 0u64;
    let mut worst = json!({});
    let track = |key: &str, value: f64, bad: bool, worst: &mut serde_json::Value| {
        let cur = worst.get(key).and_then(|v| v.as_f64()).unwrap_or(f64::NEG_INFINITY);
        if value > cur {
            worst[key] = json!(value);
        }
        bad as u64
    };
    for _ in 0..n {
        let a = draw(rng);
        let b = draw(rng);
        let pa = set.project(&a)?;
        let pb = set.project(&b)?;
        violations += track("membership", 0.0, !set.contains(&pa, 1e-10)?, &mut worst);
        let idem = (set.project(&pa)? - &pa).norm();
        violations += track("idempotence", idem, idem > 1e-12, &mut worst);
        let expand = (&pa - &pb).norm() - (&a - &b).norm();
        violations += track("expansion", expand, expand > 1e-12, &mut worst);
        let z = set.sample(rng);
        let vi = (&a - &pa).dot(&(z - &pa));
        violations += track("variational", vi, vi > 1e-10, &mut worst);
        if let ConvexSet::Simplex { .. } = set {
            let sum_err = (pa.sum() - 1.0).abs();
            violations += track("simplex_sum", sum_err, sum_err > 1e-12, &mut worst);
            let neg = -pa.min();
            violations += track("simplex_negativity", neg, neg > 1e-15, &mut worst);
        }
    }
    Ok(CheckReport::at_most(format!("projection.{}", set.kind()), violations as f64, 0.0, n as u64)
        .with_details(json!({ "dim": d, "worst": worst })))
}
