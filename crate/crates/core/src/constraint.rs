//! Closed convex sets for the maximization variable, each with an exact
//! Euclidean projection `P(y0) = argmin_{y in Y} |y - y0|^2 / 2`.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConvexSet {
    /// All of `R^dim`.
    Free { dim: usize },
    /// `{y : |y|_2 <= radius}`.
    L2Ball { dim: usize, radius: f64 },
    /// `{y : |y|_inf <= radius}`.
    LinfBall { dim: usize, radius: f64 },
    /// Probability simplex `{p >= 0 : sum p = 1}` in `R^dim`.
    Simplex { dim: usize },
}

impl ConvexSet {
    pub fn kind(&self) -> &'static str {
        match self {
            ConvexSet::Free { .. } => "free",
            ConvexSet::L2Ball { .. } => "l2_ball",
            ConvexSet::LinfBall { .. } => "linf_ball",
            ConvexSet::Simplex { .. } => "simplex",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::Free { dim } | ConvexSet::Simplex { dim } if *dim == 0 => {
                Err(Error::Config("set dimension must be >= 1".into()))
            }
            ConvexSet::L2Ball { dim, radius } | ConvexSet::LinfBall { dim, radius } => {
                if *dim == 0 {
                    Err(Error::Config("set dimension must be >= 1".into()))
                } else if !(*radius > 0.0 && radius.is_finite()) {
                    Err(Error::Config(format!("ball radius must be positive, got {radius}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Free { dim }
            | ConvexSet::L2Ball { dim, .. }
            | ConvexSet::LinfBall { dim, .. }
            | ConvexSet::Simplex { dim } => *dim,
        }
    }

    /// Diameter of the set, `None` when unbounded.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            ConvexSet::Free { .. } => None,
            ConvexSet::L2Ball { radius, .. } => Some(2.0 * radius),
            ConvexSet::LinfBall { dim, radius } => Some(2.0 * radius * (*dim as f64).sqrt()),
            ConvexSet::Simplex { .. } => Some(std::f64::consts::SQRT_2),
        }
    }

    fn check(&self, y: &Vector) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::dim(self.dim(), y.len()));
        }
        Ok(())
    }

    pub fn project(&self, y0: &Vector) -> Result<Vector> {
        self.check(y0)?;
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("projection input is not finite".into()));
        }
        Ok(match self {
            ConvexSet::Free { .. } => y0.clone(),
            ConvexSet::L2Ball { radius, .. } => {
                let n = y0.norm();
                if n <= *radius {
                    y0.clone()
                } else {
                    y0 * (radius / n)
                }
            }
            ConvexSet::LinfBall { radius, .. } => y0.map(|v| v.clamp(-radius, *radius)),
            ConvexSet::Simplex { .. } => project_simplex(y0),
        })
    }

    /// True iff `y` lies within `tol` of the set.
    pub fn contains(&self, y: &Vector, tol: f64) -> Result<bool> {
        self.check(y)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        Ok(match self {
            ConvexSet::Free { .. } => true,
            ConvexSet::L2Ball { radius, .. } => y.norm() <= radius + tol,
            ConvexSet::LinfBall { radius, .. } => y.amax() <= radius + tol,
            ConvexSet::Simplex { .. } => y.iter().all(|v| *v >= -tol) && (y.sum() - 1.0).abs() <= tol,
        })
    }

    /// A canonical feasible point: the origin for balls and the free set,
    /// the barycenter for the simplex.
    pub fn center(&self) -> Vector {
        match self {
            ConvexSet::Simplex { dim } => Vector::from_element(*dim, 1.0 / *dim as f64),
            _ => Vector::zeros(self.dim()),
        }
    }

    /// Random feasible point: uniform in the balls, flat Dirichlet on the
    /// simplex, standard normal on the free set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let d = self.dim();
        match self {
            ConvexSet::Free { .. } => Vector::from_fn(d, |_, _| rng.sample(StandardNormal)),
            ConvexSet::L2Ball { radius, .. } => {
                let g = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                let n = g.norm();
                if n > 0.0 {
                    g * (r / n)
                } else {
                    g
                }
            }
            ConvexSet::LinfBall { radius, .. } => Vector::from_fn(d, |_, _| rng.random_range(-radius..=*radius)),
            ConvexSet::Simplex { .. } => {
                let e = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(Exp1));
                let s = e.sum();
                e / s
            }
        }
    }
}

/// Sort-based simplex projection: sort descending, take the largest index
/// `k` with `u_k - (sum_{j<=k} u_j - 1) / k > 0`, shift by that threshold
/// and clamp at zero.
fn project_simplex(y0: &Vector) -> Vector {
    let mut u: Vec<f64> = y0.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    let mut p = y0.map(|v| (v - theta).max(0.0));
    // absorb the residual of the summation into the positive entries
    let s = p.sum();
    if s > 0.0 && (s - 1.0).abs() > 1e-15 {
        p /= s;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn l2_ball_radial_scaling() {
        let s = ConvexSet::L2Ball { dim: 2, radius: 1.0 };
        let p = s.project(&v(&[3.0, 4.0])).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn interior_points_are_fixed() {
        let y = v(&[0.25, 0.75]);
        for s in [
            ConvexSet::Free { dim: 2 },
            ConvexSet::L2Ball { dim: 2, radius: 1.0 },
            ConvexSet::LinfBall { dim: 2, radius: 1.0 },
            ConvexSet::Simplex { dim: 2 },
        ] {
            assert_eq!(s.project(&y).unwrap(), y);
        }
    }

    #[test]
    fn simplex_corner() {
        let s = ConvexSet::Simplex { dim: 2 };
        assert_eq!(s.project(&v(&[2.0, 0.0])).unwrap(), v(&[1.0, 0.0]));
    }

    #[test]
    fn simplex_matches_grid_search() {
        // brute force over p = (t, 1 - t) at resolution 1e-4
        let s = ConvexSet::Simplex { dim: 2 };
        for y0 in [[2.0, 0.0], [0.3, 0.1], [-1.0, 0.4], [0.5, 0.5], [10.0, 9.5]] {
            let y0 = v(&y0);
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..=10_000 {
                let t = i as f64 * 1e-4;
                let d = (t - y0[0]).powi(2) + (1.0 - t - y0[1]).powi(2);
                if d < best.0 {
                    best = (d, t);
                }
            }
            let p = s.project(&y0).unwrap();
            assert_abs_diff_eq!(p[0], best.1, epsilon = 1e-3);
            assert_abs_diff_eq!(p[1], 1.0 - best.1, epsilon = 1e-3);
        }
    }

    #[test]
    fn linf_clamps() {
        let s = ConvexSet::LinfBall { dim: 3, radius: 0.5 };
        assert_eq!(s.project(&v(&[1.0, -2.0, 0.1])).unwrap(), v(&[0.5, -0.5, 0.1]));
    }

    #[test]
    fn contains_examples() {
        let simplex = ConvexSet::Simplex { dim: 2 };
        assert!(simplex.contains(&v(&[0.5, 0.5]), 1e-12).unwrap());
        let ball = ConvexSet::L2Ball { dim: 2, radius: 1.0 };
        assert!(!ball.contains(&v(&[1.0 + 1e-6, 0.0]), 1e-9).unwrap());
    }

    #[test]
    fn errors() {
        let s = ConvexSet::L2Ball { dim: 2, radius: 1.0 };
        assert!(matches!(s.project(&v(&[f64::NAN, 0.0])), Err(Error::Numeric(_))));
        assert!(matches!(s.project(&v(&[1.0])), Err(Error::Dimension { .. })));
        assert!(ConvexSet::L2Ball { dim: 2, radius: 0.0 }.validate().is_err());
        assert!(ConvexSet::Simplex { dim: 0 }.validate().is_err());
    }
}
