//! Least squares on the Stiefel manifold under a universal input
//! perturbation `y`:
//! `f(W, y) = (1/n) sum_i |W^T (a_i + y) - b_i|^2 - (rho/2) |y|^2`.
//!
//! Since `W^T W = I`, the y-Hessian is `2 W W^T - rho I`, so the problem is
//! `(rho - 2)`-strongly concave in `y` for `rho > 2`.

use serde::{Deserialize, Serialize};

use super::MinimaxProblem;
use crate::constraint::ConvexSet;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint};
use crate::{Mat, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionBall {
    L2,
    Linf,
    /// Unconstrained perturbation; the radius is ignored.
    Free,
}

#[derive(Clone, Debug)]
pub struct RobustRegression {
    manifold: Manifold,
    y_set: ConvexSet,
    rho: f64,
    /// Inputs as columns, `d x n`.
    inputs: Mat,
    /// Targets as columns, `r x n`.
    targets: Mat,
}

/// `data` holds `(a_i, b_i)` pairs with `a_i in R^d`, `b_i in R^r`.
pub fn make_robust_regression(
    data: &[(Vec<f64>, Vec<f64>)],
    r: usize,
    epsilon: f64,
    rho: f64,
    ball: RegressionBall,
) -> Result<RobustRegression> {
    if !(rho > 2.0) {
        return Err(Error::Config(format!("rho must exceed 2 to keep the problem strongly concave, got {rho}")));
    }
    let n = data.len();
    if n == 0 {
        return Err(Error::Config("regression needs at least one sample".into()));
    }
    let d = data[0].0.len();
    for (a, b) in data {
        if a.len() != d {
            return Err(Error::dim(d, a.len()));
        }
        if b.len() != r {
            return Err(Error::dim(r, b.len()));
        }
        if a.iter().chain(b).any(|v| !v.is_finite()) {
            return Err(Error::Config("regression data contains non-finite values".into()));
        }
    }
    let manifold = Manifold::stiefel(d, r)?;
    let y_set = match ball {
        RegressionBall::L2 => ConvexSet::L2Ball { dim: d, radius: epsilon },
        RegressionBall::Linf => ConvexSet::LinfBall { dim: d, radius: epsilon },
        RegressionBall::Free => ConvexSet::Free { dim: d },
    };
    y_set.validate()?;
    Ok(RobustRegression {
        manifold,
        y_set,
        rho,
        inputs: Mat::from_fn(d, n, |i, j| data[j].0[i]),
        targets: Mat::from_fn(r, n, |i, j| data[j].1[i]),
    })
}

impl RobustRegression {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Maximizer over all of `R^d`: `2 W (W^T a_mean - b_mean) / (rho - 2)`.
    pub fn unconstrained_y_star(&self, x: &ManifoldPoint) -> Vector {
        let n = self.inputs.ncols() as f64;
        let a_mean = self.inputs.column_sum() / n;
        let b_mean = self.targets.column_sum() / n;
        let w = x.matrix();
        let g0 = w * (w.tr_mul(&a_mean) - b_mean) * 2.0;
        g0 / (self.rho - 2.0)
    }
}

impl MinimaxProblem for RobustRegression {
    fn name(&self) -> &str {
        "robust_regression"
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn y_set(&self) -> &ConvexSet {
        &self.y_set
    }

    fn mu(&self) -> f64 {
        self.rho - 2.0
    }

    fn num_samples(&self) -> usize {
        self.inputs.ncols()
    }

    /// `2 W W^T - rho I` has spectral norm `rho`.
    fn y_smoothness(&self) -> Option<f64> {
        Some(self.rho)
    }

    fn batch_value(&self, x: &ManifoldPoint, y: &Vector, indices: &[usize]) -> f64 {
        let w = x.matrix();
        let mut acc = 0.0;
        for &i in indices {
            let z = self.inputs.column(i) + y;
            let res = w.tr_mul(&z) - self.targets.column(i);
            acc += res.norm_squared();
        }
        acc / indices.len() as f64 - 0.5 * self.rho * y.norm_squared()
    }

    fn batch_euclidean_grads(&self, x: &ManifoldPoint, y: &Vector, indices: &[usize]) -> (Mat, Vector) {
        let w = x.matrix();
        let (d, r) = w.shape();
        let mut gx = Mat::zeros(d, r);
        let mut res_sum = Vector::zeros(r);
        for &i in indices {
            let z = self.inputs.column(i) + y;
            let res = w.tr_mul(&z) - self.targets.column(i);
            gx.ger(2.0, &z, &res, 1.0);
            res_sum += res;
        }
        let b = indices.len() as f64;
        gx /= b;
        let gy = w * (res_sum * (2.0 / b)) - y * self.rho;
        (gx, gy)
    }

    /// Closed form for the free set and the L2 ball: the inner problem is
    /// isotropic on `span(W)` and its linear term lives there, so the
    /// constrained maximizer is the radial projection of the free one.
    fn y_star(&self, x: &ManifoldPoint) -> Option<Vector> {
        match self.y_set {
            ConvexSet::Free { .. } | ConvexSet::L2Ball { .. } => self.y_set.project(&self.unconstrained_y_star(x)).ok(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::grad_y;

    fn toy() -> Vec<(Vec<f64>, Vec<f64>)> {
        vec![
            (vec![1.0, 0.0, 2.0, -1.0], vec![0.5, 1.0]),
            (vec![0.0, 1.0, -1.0, 0.5], vec![-0.5, 0.0]),
            (vec![2.0, 1.0, 0.0, 1.0], vec![1.0, -1.0]),
        ]
    }

    #[test]
    fn rejects_small_rho() {
        assert!(make_robust_regression(&toy(), 2, 1.0, 2.0, RegressionBall::L2).is_err());
    }

    #[test]
    fn zero_data_has_zero_phi() {
        let p = make_robust_regression(&[(vec![0.0; 3], vec![0.0])], 1, 1.0, 4.0, RegressionBall::L2).unwrap();
        for s in 0..4 {
            let x = p.manifold().random_point(s);
            let ys = p.y_star(&x).unwrap();
            assert!(ys.norm() < 1e-15);
            assert!(p.phi(&x).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn free_optimum_zeroes_the_y_gradient() {
        let p = make_robust_regression(&toy(), 2, 1.0, 4.0, RegressionBall::Free).unwrap();
        let x = p.manifold().random_point(3);
        let ys = p.y_star(&x).unwrap();
        assert!(grad_y(&p, &x, &ys).norm() < 1e-12);
    }

    #[test]
    fn tiny_ball_pins_y_to_zero() {
        let p = make_robust_regression(&toy(), 2, 1e-12, 4.0, RegressionBall::Linf).unwrap();
        let x = p.manifold().random_point(3);
        let g = grad_y(&p, &x, &Vector::zeros(4));
        let y = p.y_set().project(&(g * 0.1)).unwrap();
        assert!(y.amax() <= 1e-12);
    }
}
