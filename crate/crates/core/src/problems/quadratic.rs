//! Bilinear-quadratic saddle on the sphere,
//! `f(x, y) = x^T A y + b^T y - (mu/2) |y|^2`, with `x in S^{d-1}`.
//!
//! The finite-sum form uses `A_i = A + sigma * N_i` with the noise matrices
//! centered so that their mean is zero. For `Y = R^d` the inner problem has
//! the closed form `y*(x) = (A^T x + b) / mu`.

use rand::Rng as _;
use rand_distr::StandardNormal;

use super::{check_finite, MinimaxProblem, ProblemConstants};
use crate::constraint::ConvexSet;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};
use crate::{rng, Mat, Vector};

#[derive(Clone, Debug)]
pub struct QuadraticSaddle {
    manifold: Manifold,
    y_set: ConvexSet,
    mu: f64,
    b: Vector,
    /// Per-sample coupling matrices.
    samples: Vec<Mat>,
    /// Mean of `samples`, accumulated in index order.
    a_mean: Mat,
    noise: f64,
}

/// Builds the quadratic saddle. `n` is the number of finite-sum samples and
/// `noise` the per-entry standard deviation of `A_i - A` before centering.
pub fn make_quadratic_saddle(
    a: Mat,
    b: Vector,
    mu: f64,
    y_set: ConvexSet,
    n: usize,
    noise: f64,
    seed: u64,
) -> Result<QuadraticSaddle> {
    let d = a.nrows();
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Config(format!("mu must be positive, got {mu}")));
    }
    if a.ncols() != d || b.len() != d {
        return Err(Error::dim(
            format!("{d}x{d} matrix and {d}-vector"),
            format!("{}x{} matrix and {}-vector", a.nrows(), a.ncols(), b.len()),
        ));
    }
    if y_set.dim() != d {
        return Err(Error::dim(d, y_set.dim()));
    }
    if n == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::Config(format!("noise must be non-negative, got {noise}")));
    }
    check_finite("A", &a)?;
    y_set.validate()?;

    let mut samples = vec![a.clone(); n];
    if noise > 0.0 && n > 1 {
        let mut r = rng::derive(seed, "quadratic_noise");
        let mut noises: Vec<Mat> =
            (0..n).map(|_| Mat::from_fn(d, d, |_, _| noise * r.sample::<f64, _>(StandardNormal))).collect();
        let mut mean = Mat::zeros(d, d);
        for e in &noises {
            mean += e;
        }
        mean /= n as f64;
        for (s, e) in samples.iter_mut().zip(noises.iter_mut()) {
            *e -= &mean;
            *s += &*e;
        }
    }
    let mut a_mean = Mat::zeros(d, d);
    for s in &samples {
        a_mean += s;
    }
    a_mean /= n as f64;

    Ok(QuadraticSaddle { manifold: Manifold::sphere(d)?, y_set, mu, b, samples, a_mean, noise })
}

fn spectral_norm(m: &Mat) -> f64 {
    m.singular_values().max()
}

impl QuadraticSaddle {
    pub fn a(&self) -> &Mat {
        &self.a_mean
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    fn sum_a(&self, indices: &[usize]) -> Mat {
        let d = self.a_mean.nrows();
        let mut acc = Mat::zeros(d, d);
        for &i in indices {
            acc += &self.samples[i];
        }
        acc / indices.len() as f64
    }

    fn has_oracle(&self) -> bool {
        matches!(self.y_set, ConvexSet::Free { .. })
    }

    /// `A^T x + b`.
    fn affine(&self, x: &ManifoldPoint) -> Vector {
        self.a_mean.tr_mul(&x.matrix().column(0)) + &self.b
    }
}

impl MinimaxProblem for QuadraticSaddle {
    fn name(&self) -> &str {
        "quadratic_saddle"
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn y_set(&self) -> &ConvexSet {
        &self.y_set
    }

    fn mu(&self) -> f64 {
        self.mu
    }

    fn num_samples(&self) -> usize {
        self.samples.len()
    }

    fn batch_value(&self, x: &ManifoldPoint, y: &Vector, indices: &[usize]) -> f64 {
        let a = self.sum_a(indices);
        let xv = x.matrix().column(0);
        xv.dot(&(a * y)) + self.b.dot(y) - 0.5 * self.mu * y.norm_squared()
    }

    fn batch_euclidean_grads(&self, x: &ManifoldPoint, y: &Vector, indices: &[usize]) -> (Mat, Vector) {
        let a = self.sum_a(indices);
        let gx = &a * y;
        let gy = a.tr_mul(&x.matrix().column(0)) + &self.b - y * self.mu;
        let d = gx.len();
        (Mat::from_column_slice(d, 1, gx.as_slice()), gy)
    }

    fn y_star(&self, x: &ManifoldPoint) -> Option<Vector> {
        self.has_oracle().then(|| self.affine(x) / self.mu)
    }

    fn phi(&self, x: &ManifoldPoint) -> Option<f64> {
        self.has_oracle().then(|| self.affine(x).norm_squared() / (2.0 * self.mu))
    }

    /// `Proj_x(A (A^T x + b) / mu)`.
    fn grad_phi(&self, x: &ManifoldPoint) -> Option<TangentVector> {
        if !self.has_oracle() {
            return None;
        }
        let g = &self.a_mean * self.affine(x) / self.mu;
        let g = Mat::from_column_slice(g.len(), 1, g.as_slice());
        self.manifold.project_tangent(x, &g).ok()
    }

    /// Analytic constants. `l12 = l21` is the largest per-sample spectral
    /// norm, `l22 = mu`, and the curvature terms `l11`, `l` are bounds valid
    /// on the region `|y| <= (|A| + |b|) / mu` that contains every `y*(x)`.
    fn constants(&self) -> Option<ProblemConstants> {
        let a_norm = spectral_norm(&self.a_mean);
        let l12 = self.samples.iter().map(spectral_norm).fold(a_norm, f64::max).max(f64::MIN_POSITIVE);
        let y_bound = (a_norm + self.b.norm()) / self.mu;
        let l11 = (l12 * y_bound).max(f64::MIN_POSITIVE);
        let l = (2.0 * a_norm * (a_norm + self.b.norm()) / self.mu).max(f64::MIN_POSITIVE);
        let spread = self.samples.iter().map(|s| spectral_norm(&(s - &self.a_mean))).fold(0.0, f64::max);
        Some(ProblemConstants { mu: self.mu, l11, l12, l21: l12, l22: self.mu, l, sigma: spread * y_bound.max(1.0) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::rgrad_x;
    use approx::assert_abs_diff_eq;

    fn diag21() -> QuadraticSaddle {
        let a = Mat::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0]));
        make_quadratic_saddle(a, Vector::zeros(2), 1.0, ConvexSet::Free { dim: 2 }, 1, 0.0, 0).unwrap()
    }

    fn pt(p: &QuadraticSaddle, v: &[f64]) -> ManifoldPoint {
        p.manifold().point(Mat::from_column_slice(v.len(), 1, v)).unwrap()
    }

    #[test]
    fn diag_example_oracles() {
        let p = diag21();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = pt(&p, &[s, s]);
        let ys = p.y_star(&x).unwrap();
        assert_abs_diff_eq!(ys[0], 2.0 * s, epsilon = 1e-15);
        assert_abs_diff_eq!(ys[1], s, epsilon = 1e-15);
        assert_abs_diff_eq!(p.phi(&x).unwrap(), 1.25, epsilon = 1e-15);
        let g = p.grad_phi(&x).unwrap();
        assert_abs_diff_eq!(g.matrix()[0], 1.5 * s, epsilon = 1e-14);
        assert_abs_diff_eq!(g.matrix()[1], -1.5 * s, epsilon = 1e-14);
        let r = rgrad_x(&p, &x, &ys);
        assert_abs_diff_eq!(r.matrix()[0], 1.06066017177982, epsilon = 1e-12);
        assert_abs_diff_eq!(r.matrix()[1], -1.06066017177982, epsilon = 1e-12);
    }

    #[test]
    fn eigenvector_is_stationary() {
        let p = diag21();
        let x = pt(&p, &[0.0, 1.0]);
        assert!(p.grad_phi(&x).unwrap().norm() < 1e-15);
    }

    #[test]
    fn identity_coupling_has_constant_phi() {
        let p =
            make_quadratic_saddle(Mat::identity(3, 3), Vector::zeros(3), 1.0, ConvexSet::Free { dim: 3 }, 1, 0.0, 0)
                .unwrap();
        for seed in 0..5 {
            let x = p.manifold().random_point(seed);
            assert_abs_diff_eq!(p.phi(&x).unwrap(), 0.5, epsilon = 1e-14);
            assert!(p.grad_phi(&x).unwrap().norm() < 1e-14);
            let r = rgrad_x(&p, &x, &x.matrix().column(0).into_owned());
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_mu() {
        let r =
            make_quadratic_saddle(Mat::identity(2, 2), Vector::zeros(2), 0.0, ConvexSet::Free { dim: 2 }, 1, 0.0, 0);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn noise_is_centered() {
        let a = Mat::from_diagonal(&Vector::from_column_slice(&[2.0, 1.0]));
        let p =
            make_quadratic_saddle(a.clone(), Vector::zeros(2), 1.0, ConvexSet::Free { dim: 2 }, 64, 0.5, 3).unwrap();
        assert!((p.a() - a).norm() < 1e-13);
        assert!(p.constants().unwrap().sigma > 0.0);
    }

    #[test]
    fn oracle_absent_for_bounded_y() {
        let p = make_quadratic_saddle(
            Mat::identity(2, 2),
            Vector::zeros(2),
            1.0,
            ConvexSet::L2Ball { dim: 2, radius: 0.5 },
            1,
            0.0,
            0,
        )
        .unwrap();
        let x = p.manifold().random_point(0);
        assert!(p.y_star(&x).is_none());
        assert!(p.grad_phi(&x).is_none());
    }
}
