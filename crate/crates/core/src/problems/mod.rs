//! Min-max problems `min_{x in M} max_{y in Y} f(x, y)` with `f(x, .)`
//! strongly concave, written as finite sums `f = (1/n) sum_i f_i`.
//!
//! A problem exposes batch-mean values and Euclidean gradients; the
//! Riemannian x-gradient is always the tangent projection of the Euclidean
//! one ([`rgrad_x`]). Deterministic quantities are the batch over all
//! samples in ascending order, so a full batch reproduces them bit for bit.

mod dataset;
mod dro;
mod quadratic;
mod regression;
mod synthetic;

pub use dataset::load_matrix_csv;
pub use dro::{make_dro, DroProblem};
pub use quadratic::{make_quadratic_saddle, QuadraticSaddle};
pub use regression::{make_robust_regression, RegressionBall, RobustRegression};
pub use synthetic::{synthetic_dro_samples, synthetic_regression_data};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constraint::ConvexSet;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint, TangentVector};
use crate::{Mat, Vector};

/// Smoothness and noise constants of a problem.
///
/// `l11`..`l22` bound the partial gradients' Lipschitz moduli, `l` is the
/// retraction-smoothness of `Phi` and `sigma` bounds the standard deviation
/// of per-sample gradients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConstants {
    pub mu: f64,
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l22: f64,
    pub l: f64,
    pub sigma: f64,
}

impl ProblemConstants {
    /// `max(l11, l12, l21, l22)`.
    pub fn l_tilde(&self) -> f64 {
        self.l11.max(self.l12).max(self.l21).max(self.l22)
    }

    /// Condition number `l_tilde / mu`.
    pub fn kappa(&self) -> f64 {
        self.l_tilde() / self.mu
    }

    /// Lipschitz modulus of `grad Phi`: `kappa * l12 + l11`.
    pub fn g(&self) -> f64 {
        self.kappa() * self.l12 + self.l11
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.l11, self.l12, self.l21, self.l22, self.l];
        if all.iter().any(|c| !(*c > 0.0 && c.is_finite())) || !(self.sigma >= 0.0) {
            return Err(Error::Config(format!("problem constants must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Sample indices of a mini-batch, kept in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBatch {
    indices: Vec<usize>,
}

impl SampleBatch {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Domain("empty sample batch".into()));
        }
        if let Some(bad) = indices.iter().find(|i| **i >= n) {
            return Err(Error::Domain(format!("sample index {bad} out of range for n = {n}")));
        }
        indices.sort_unstable();
        Ok(SampleBatch { indices })
    }

    pub fn full(n: usize) -> Self {
        SampleBatch { indices: (0..n).collect() }
    }

    /// `size` i.i.d. uniform draws with replacement.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, n: usize, size: usize) -> Self {
        let mut indices: Vec<usize> = (0..size).map(|_| rng.random_range(0..n)).collect();
        indices.sort_unstable();
        SampleBatch { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Riemannian x-gradient and Euclidean y-gradient at one query point.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientPair {
    pub v: TangentVector,
    pub w: Vector,
}

pub trait MinimaxProblem: Send + Sync {
    fn name(&self) -> &str;

    fn manifold(&self) -> &Manifold;

    fn y_set(&self) -> &ConvexSet;

    fn y_dim(&self) -> usize {
        self.y_set().dim()
    }

    /// Declared strong-concavity modulus in `y`.
    fn mu(&self) -> f64;

    /// Number of samples in the finite sum.
    fn num_samples(&self) -> usize;

    /// Mean of `f_i(x, y)` over `indices` (ascending).
    fn batch_value(&self, x: &ManifoldPoint, y: &Vector, indices: &[usize]) -> f64;

    /// Means of the Euclidean gradients `(grad_x f_i, grad_y f_i)` over
    /// `indices` (ascending).
    fn batch_euclidean_grads(&self, x: &ManifoldPoint, y: &Vector, indices: &[usize]) -> (Mat, Vector);

    fn value(&self, x: &ManifoldPoint, y: &Vector) -> f64 {
        self.batch_value(x, y, SampleBatch::full(self.num_samples()).indices())
    }

    fn euclidean_grads(&self, x: &ManifoldPoint, y: &Vector) -> (Mat, Vector) {
        self.batch_euclidean_grads(x, y, SampleBatch::full(self.num_samples()).indices())
    }

    /// Analytic inner maximizer `y*(x)`, when available.
    fn y_star(&self, _x: &ManifoldPoint) -> Option<Vector> {
        None
    }

    /// `Phi(x) = f(x, y*(x))`.
    fn phi(&self, x: &ManifoldPoint) -> Option<f64> {
        self.y_star(x).map(|y| self.value(x, &y))
    }

    /// `grad Phi(x) = grad_x f(x, y*(x))`.
    fn grad_phi(&self, x: &ManifoldPoint) -> Option<TangentVector> {
        let y = self.y_star(x)?;
        Some(rgrad_x(self, x, &y))
    }

    /// Analytic constants, when the problem knows them.
    fn constants(&self) -> Option<ProblemConstants> {
        None
    }

    /// Lipschitz modulus of `grad_y f(x, .)`, when known.
    fn y_smoothness(&self) -> Option<f64> {
        self.constants().map(|c| c.l22)
    }
}

/// Riemannian gradient in `x`: tangent projection of the Euclidean gradient.
pub fn rgrad_x<P: MinimaxProblem + ?Sized>(p: &P, x: &ManifoldPoint, y: &Vector) -> TangentVector {
    let (gx, _) = p.euclidean_grads(x, y);
    p.manifold().project_tangent(x, &gx).expect("problem gradient has the manifold shape")
}

pub fn grad_y<P: MinimaxProblem + ?Sized>(p: &P, x: &ManifoldPoint, y: &Vector) -> Vector {
    p.euclidean_grads(x, y).1
}

/// Deterministic (full finite-sum) gradient pair.
pub fn full_grads<P: MinimaxProblem + ?Sized>(p: &P, x: &ManifoldPoint, y: &Vector) -> GradientPair {
    grads_on(p, x, y, SampleBatch::full(p.num_samples()).indices())
}

/// Mini-batch gradient pair.
pub fn stoch_grads<P: MinimaxProblem + ?Sized>(
    p: &P,
    x: &ManifoldPoint,
    y: &Vector,
    batch: &SampleBatch,
) -> Result<GradientPair> {
    if batch.is_empty() {
        return Err(Error::Domain("empty sample batch".into()));
    }
    let n = p.num_samples();
    if batch.indices().iter().any(|i| *i >= n) {
        return Err(Error::Domain("sample index out of range".into()));
    }
    Ok(grads_on(p, x, y, batch.indices()))
}

fn grads_on<P: MinimaxProblem + ?Sized>(p: &P, x: &ManifoldPoint, y: &Vector, indices: &[usize]) -> GradientPair {
    let (gx, gy) = p.batch_euclidean_grads(x, y, indices);
    let v = p.manifold().project_tangent(x, &gx).expect("problem gradient has the manifold shape");
    GradientPair { v, w: gy }
}

fn check_finite(name: &str, m: &Mat) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("{name} contains non-finite values")));
    }
    Ok(())
}
