//! Distributionally robust PCA over the probability simplex:
//! `f(x, p) = sum_i p_i l_i(x) - |p - 1/n|^2` with the projected-variance
//! loss `l_i(x) = -tr(x^T xi_i xi_i^T x)`.
//!
//! As a finite sum the i-th component is
//! `f_i(x, p) = n p_i l_i(x) - |p - 1/n|^2`, whose mean over all samples is
//! `f`. The quadratic penalty makes `f(x, .)` 2-strongly concave.

use super::MinimaxProblem;
use crate::constraint::ConvexSet;
use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint};
use crate::{Mat, Vector};

#[derive(Clone, Debug)]
pub struct DroProblem {
    manifold: Manifold,
    y_set: ConvexSet,
    /// Samples as the columns of a `d x n` matrix.
    data: Mat,
}

/// Builds the DRO problem from sample vectors on the sphere (`cols == 1`)
/// or on `St(d, cols)`.
pub fn make_dro(samples: &[Vec<f64>], cols: usize) -> Result<DroProblem> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Config(format!("DRO needs at least 2 samples, got {n}")));
    }
    let d = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != d) {
        return Err(Error::dim(d, bad.len()));
    }
    if samples.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("DRO samples contain non-finite values".into()));
    }
    let manifold = if cols == 1 { Manifold::sphere(d)? } else { Manifold::stiefel(d, cols)? };
    let data = Mat::from_fn(d, n, |r, c| samples[c][r]);
    Ok(DroProblem { manifold, y_set: ConvexSet::Simplex { dim: n }, data })
}

impl DroProblem {
    /// `l_i(x) = -|x^T xi_i|^2` for every sample.
    pub fn losses(&self, x: &ManifoldPoint) -> Vector {
        let proj = x.matrix().tr_mul(&self.data); // r x n
        Vector::from_iterator(proj.ncols(), proj.column_iter().map(|c| -c.norm_squared()))
    }

    fn penalty(&self, p: &Vector) -> f64 {
        let u = 1.0 / p.len() as f64;
        p.iter().map(|pi| (pi - u).powi(2)).sum()
    }
}

impl MinimaxProblem for DroProblem {
    fn name(&self) -> &str {
        "dro"
    }

    fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn y_set(&self) -> &ConvexSet {
        &self.y_set
    }

    fn mu(&self) -> f64 {
        2.0
    }

    fn num_samples(&self) -> usize {
        self.data.ncols()
    }

    /// The penalty's y-Hessian is `-2 I`.
    fn y_smoothness(&self) -> Option<f64> {
        Some(2.0)
    }

    fn batch_value(&self, x: &ManifoldPoint, p: &Vector, indices: &[usize]) -> f64 {
        let n = self.num_samples() as f64;
        let mut acc = 0.0;
        for &i in indices {
            let c = x.matrix().tr_mul(&self.data.column(i));
            acc += n * p[i] * -c.norm_squared();
        }
        acc / indices.len() as f64 - self.penalty(p)
    }

    fn batch_euclidean_grads(&self, x: &ManifoldPoint, p: &Vector, indices: &[usize]) -> (Mat, Vector) {
        let n = self.num_samples();
        let nf = n as f64;
        let b = indices.len() as f64;
        let (d, r) = x.matrix().shape();
        let mut gx = Mat::zeros(d, r);
        let mut gy = Vector::zeros(n);
        for &i in indices {
            let xi = self.data.column(i);
            let c = x.matrix().tr_mul(&xi); // r-vector
                                            // grad_x of n p_i l_i = -2 n p_i xi (xi^T x)
            gx.ger(-2.0 * nf * p[i], &xi, &c, 1.0);
            gy[i] += nf * -c.norm_squared();
        }
        gx /= b;
        gy /= b;
        let u = 1.0 / nf;
        for (g, pi) in gy.iter_mut().zip(p.iter()) {
            *g -= 2.0 * (pi - u);
        }
        (gx, gy)
    }
}
