//! Manifold primitives for the minimization variable.
//!
//! Points and tangent vectors are dense `rows x cols` matrices embedded in
//! Euclidean space, and every manifold uses the embedded Frobenius metric
//! `<U, V> = tr(U^T V)`. Supported manifolds:
//!
//! | kind        | point set                      | retraction           | transport                  |
//! |-------------|--------------------------------|----------------------|----------------------------|
//! | `euclidean` | `R^{d x r}`                    | `x + u`              | identity                   |
//! | `sphere`    | `{x in R^d : |x| = 1}`         | `(x + u) / |x + u|`  | parallel transport         |
//! | `stiefel`   | `{X in R^{d x r} : X^T X = I}` | `qf(X + U)`          | rotation transport         |
//! | `product`   | Cartesian product              | component-wise       | component-wise             |
//!
//! Product points are stored as one column vector holding the column-major
//! vectorization of each component, in order.

mod sphere;
mod stiefel;

pub use sphere::parallel_transport_along_geodesic;
pub use stiefel::{projection_rescaled_transport, qf};

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{rng, Mat};

/// Maximum drift of the point invariant tolerated before re-orthonormalizing.
pub const POINT_TOL: f64 = 1e-10;

/// Relative tolerance used when an operation requires a tangent input.
pub const TANGENT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Manifold {
    Euclidean { rows: usize, cols: usize },
    Sphere { dim: usize },
    Stiefel { rows: usize, cols: usize },
    Product { components: Vec<Manifold> },
}

/// A point on a manifold. Construct through [`Manifold::point`] or the
/// manifold operations so the invariant holds.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint(Mat);

/// A tangent vector. The base point is not stored; every operation takes it
/// explicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector(Mat);

impl ManifoldPoint {
    /// Wraps a matrix without checking the manifold invariant.
    pub fn from_matrix_unchecked(m: Mat) -> Self {
        ManifoldPoint(m)
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }
}

impl TangentVector {
    pub fn from_matrix_unchecked(m: Mat) -> Self {
        TangentVector(m)
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    /// Frobenius norm. Equals the Riemannian norm for every supported manifold.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn scale(&self, a: f64) -> TangentVector {
        TangentVector(&self.0 * a)
    }
}

impl Add for &TangentVector {
    type Output = TangentVector;
    fn add(self, rhs: &TangentVector) -> TangentVector {
        TangentVector(&self.0 + &rhs.0)
    }
}

impl Sub for &TangentVector {
    type Output = TangentVector;
    fn sub(self, rhs: &TangentVector) -> TangentVector {
        TangentVector(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &TangentVector {
    type Output = TangentVector;
    fn mul(self, a: f64) -> TangentVector {
        TangentVector(&self.0 * a)
    }
}

impl Neg for &TangentVector {
    type Output = TangentVector;
    fn neg(self) -> TangentVector {
        TangentVector(-&self.0)
    }
}

impl Manifold {
    pub fn kind(&self) -> &'static str {
        match self {
            Manifold::Euclidean { .. } => "euclidean",
            Manifold::Sphere { .. } => "sphere",
            Manifold::Stiefel { .. } => "stiefel",
            Manifold::Product { .. } => "product",
        }
    }

    pub fn euclidean(rows: usize, cols: usize) -> Result<Self> {
        let m = Manifold::Euclidean { rows, cols };
        m.validate()?;
        Ok(m)
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        let m = Manifold::Sphere { dim };
        m.validate()?;
        Ok(m)
    }

    pub fn stiefel(rows: usize, cols: usize) -> Result<Self> {
        let m = Manifold::Stiefel { rows, cols };
        m.validate()?;
        Ok(m)
    }

    pub fn product(components: Vec<Manifold>) -> Result<Self> {
        let m = Manifold::Product { components };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Manifold::Euclidean { rows, cols } => {
                if *rows == 0 || *cols == 0 {
                    return Err(Error::Config(format!("euclidean shape must be positive, got {rows}x{cols}")));
                }
            }
            Manifold::Sphere { dim } => {
                if *dim == 0 {
                    return Err(Error::Config("sphere dimension must be >= 1".into()));
                }
            }
            Manifold::Stiefel { rows, cols } => {
                if *cols == 0 || rows < cols {
                    return Err(Error::Config(format!("stiefel requires rows >= cols >= 1, got {rows}x{cols}")));
                }
            }
            Manifold::Product { components } => {
                if components.is_empty() {
                    return Err(Error::Config("product needs at least one component".into()));
                }
                for c in components {
                    c.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Shape of the matrices representing points and tangent vectors.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Manifold::Euclidean { rows, cols } | Manifold::Stiefel { rows, cols } => (*rows, *cols),
            Manifold::Sphere { dim } => (*dim, 1),
            Manifold::Product { components } => (components.iter().map(|c| c.ambient_len()).sum(), 1),
        }
    }

    fn ambient_len(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    /// Intrinsic dimension.
    pub fn dimension(&self) -> usize {
        match self {
            Manifold::Euclidean { rows, cols } => rows * cols,
            Manifold::Sphere { dim } => dim - 1,
            Manifold::Stiefel { rows, cols } => rows * cols - cols * (cols + 1) / 2,
            Manifold::Product { components } => components.iter().map(|c| c.dimension()).sum(),
        }
    }

    fn check_shape(&self, m: &Mat) -> Result<()> {
        let shape = self.shape();
        if m.shape() != shape {
            return Err(Error::dim(format!("{}x{}", shape.0, shape.1), format!("{}x{}", m.nrows(), m.ncols())));
        }
        Ok(())
    }

    /// Splits a product-manifold matrix into its component matrices.
    pub fn split(&self, m: &Mat) -> Vec<Mat> {
        match self {
            Manifold::Product { components } => {
                let mut out = Vec::with_capacity(components.len());
                let mut offset = 0;
                for c in components {
                    let (r, k) = c.shape();
                    let len = r * k;
                    out.push(Mat::from_column_slice(r, k, &m.as_slice()[offset..offset + len]));
                    offset += len;
                }
                out
            }
            _ => vec![m.clone()],
        }
    }

    /// Inverse of [`Manifold::split`].
    pub fn join(&self, parts: &[Mat]) -> Mat {
        match self {
            Manifold::Product { .. } => {
                let data: Vec<f64> = parts.iter().flat_map(|p| p.iter().copied()).collect();
                Mat::from_column_slice(data.len(), 1, &data)
            }
            _ => parts[0].clone(),
        }
    }

    /// Deviation from the point invariant: `| |x| - 1 |` on the sphere,
    /// `|X^T X - I|_F` on Stiefel, maximum over components on products.
    pub fn point_residual(&self, m: &Mat) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => (m.norm() - 1.0).abs(),
            Manifold::Stiefel { cols, .. } => (m.transpose() * m - Mat::identity(*cols, *cols)).norm(),
            Manifold::Product { components } => {
                components.iter().zip(self.split(m)).map(|(c, p)| c.point_residual(&p)).fold(0.0, f64::max)
            }
        }
    }

    /// Deviation from tangency at `x`: `|x^T u|` on the sphere,
    /// `|X^T U + U^T X|_F` on Stiefel.
    pub fn tangent_residual(&self, x: &ManifoldPoint, u: &Mat) -> f64 {
        match self {
            Manifold::Euclidean { .. } => 0.0,
            Manifold::Sphere { .. } => x.0.dot(u).abs(),
            Manifold::Stiefel { .. } => {
                let xtu = x.0.transpose() * u;
                (&xtu + xtu.transpose()).norm()
            }
            Manifold::Product { components } => components
                .iter()
                .zip(self.split(&x.0))
                .zip(self.split(u))
                .map(|((c, xp), up)| c.tangent_residual(&ManifoldPoint(xp), &up))
                .fold(0.0, f64::max),
        }
    }

    /// Validates and wraps a point.
    pub fn point(&self, m: Mat) -> Result<ManifoldPoint> {
        self.check_shape(&m)?;
        let res = self.point_residual(&m);
        if !(res <= POINT_TOL) {
            return Err(Error::Domain(format!("matrix is not on the manifold (residual {res:e})")));
        }
        Ok(ManifoldPoint(m))
    }

    /// Validates and wraps a tangent vector at `x`.
    pub fn tangent(&self, x: &ManifoldPoint, m: Mat) -> Result<TangentVector> {
        self.check_shape(&m)?;
        self.ensure_tangent(x, &m)?;
        Ok(TangentVector(m))
    }

    fn ensure_tangent(&self, x: &ManifoldPoint, u: &Mat) -> Result<()> {
        let res = self.tangent_residual(x, u);
        if !(res <= TANGENT_TOL * (1.0 + u.norm())) {
            return Err(Error::Domain(format!("vector is not tangent at the base point (residual {res:e})")));
        }
        Ok(())
    }

    pub fn zero_tangent(&self) -> TangentVector {
        let (r, c) = self.shape();
        TangentVector(Mat::zeros(r, c))
    }

    /// Orthogonal projection of an ambient matrix onto `T_x M`.
    pub fn project_tangent(&self, x: &ManifoldPoint, z: &Mat) -> Result<TangentVector> {
        self.check_shape(&x.0)?;
        self.check_shape(z)?;
        Ok(TangentVector(self.project_raw(&x.0, z)))
    }

    fn project_raw(&self, x: &Mat, z: &Mat) -> Mat {
        match self {
            Manifold::Euclidean { .. } => z.clone(),
            Manifold::Sphere { .. } => z - x * x.dot(z),
            Manifold::Stiefel { .. } => stiefel::project(x, z),
            Manifold::Product { components } => {
                let parts: Vec<Mat> = components
                    .iter()
                    .zip(self.split(x))
                    .zip(self.split(z))
                    .map(|((c, xp), zp)| c.project_raw(&xp, &zp))
                    .collect();
                self.join(&parts)
            }
        }
    }

    /// Retraction `R_x(u)`. Returns `x` unchanged when `u` is the exact zero
    /// matrix.
    pub fn retract(&self, x: &ManifoldPoint, u: &TangentVector) -> Result<ManifoldPoint> {
        self.check_shape(&x.0)?;
        self.check_shape(&u.0)?;
        if u.is_exact_zero() {
            return Ok(x.clone());
        }
        let y = self.retract_raw(&x.0, &u.0);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("retraction produced a non-finite point".into()));
        }
        Ok(ManifoldPoint(y))
    }

    fn retract_raw(&self, x: &Mat, u: &Mat) -> Mat {
        match self {
            Manifold::Euclidean { .. } => x + u,
            Manifold::Sphere { .. } => sphere::retract(x, u),
            Manifold::Stiefel { .. } => stiefel::retract(x, u),
            Manifold::Product { components } => {
                let parts: Vec<Mat> = components
                    .iter()
                    .zip(self.split(x))
                    .zip(self.split(u))
                    .map(|((c, xp), up)| if up.iter().all(|v| *v == 0.0) { xp } else { c.retract_raw(&xp, &up) })
                    .collect();
                self.join(&parts)
            }
        }
    }

    /// Vector transport of `v in T_x M` to `T_{R_x(u)} M`. Identity when `u`
    /// is the exact zero matrix.
    pub fn transport(&self, x: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> Result<TangentVector> {
        self.check_shape(&v.0)?;
        self.ensure_tangent(x, &v.0)?;
        if u.is_exact_zero() {
            return Ok(v.clone());
        }
        let y = self.retract(x, u)?;
        Ok(TangentVector(self.transport_raw(&x.0, &y.0, &v.0)))
    }

    /// Vector transport of `v in T_x M` to `T_y M`. Every transport in this
    /// module depends only on the two end points.
    pub fn transport_to(&self, x: &ManifoldPoint, y: &ManifoldPoint, v: &TangentVector) -> Result<TangentVector> {
        self.check_shape(&x.0)?;
        self.check_shape(&y.0)?;
        self.check_shape(&v.0)?;
        self.ensure_tangent(x, &v.0)?;
        if x == y {
            return Ok(v.clone());
        }
        Ok(TangentVector(self.transport_raw(&x.0, &y.0, &v.0)))
    }

    fn transport_raw(&self, x: &Mat, y: &Mat, v: &Mat) -> Mat {
        match self {
            Manifold::Euclidean { .. } => v.clone(),
            Manifold::Sphere { .. } => sphere::transport(x, y, v),
            Manifold::Stiefel { .. } => stiefel::transport(x, y, v),
            Manifold::Product { components } => {
                let parts: Vec<Mat> = components
                    .iter()
                    .zip(self.split(x))
                    .zip(self.split(y))
                    .zip(self.split(v))
                    .map(|(((c, xp), yp), vp)| if xp == yp { vp } else { c.transport_raw(&xp, &yp, &vp) })
                    .collect();
                self.join(&parts)
            }
        }
    }

    /// Riemannian inner product `<u, v>_x`.
    pub fn inner(&self, _x: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> f64 {
        u.0.dot(&v.0)
    }

    pub fn norm(&self, x: &ManifoldPoint, u: &TangentVector) -> f64 {
        self.inner(x, u, u).sqrt()
    }

    /// Pulls a drifted point back onto the manifold when its residual
    /// exceeds [`POINT_TOL`].
    pub fn reorthonormalize(&self, x: ManifoldPoint) -> ManifoldPoint {
        if self.point_residual(&x.0) <= POINT_TOL {
            return x;
        }
        ManifoldPoint(self.normalize_raw(&x.0))
    }

    fn normalize_raw(&self, x: &Mat) -> Mat {
        match self {
            Manifold::Euclidean { .. } => x.clone(),
            Manifold::Sphere { .. } => x / x.norm(),
            Manifold::Stiefel { .. } => qf(x),
            Manifold::Product { components } => {
                let parts: Vec<Mat> = components.iter().zip(self.split(x)).map(|(c, p)| c.normalize_raw(&p)).collect();
                self.join(&parts)
            }
        }
    }

    pub fn random_point(&self, seed: u64) -> ManifoldPoint {
        self.random_point_with(&mut rng::derive(seed, "random_point"))
    }

    /// Random point: Gaussian entries, then normalized (sphere) or
    /// orthonormalized by `qf` (Stiefel).
    pub fn random_point_with<R: Rng + ?Sized>(&self, rng: &mut R) -> ManifoldPoint {
        let (r, c) = self.shape();
        let g = gaussian(r, c, rng);
        ManifoldPoint(self.normalize_raw(&g))
    }

    pub fn random_tangent(&self, x: &ManifoldPoint, seed: u64, scale: f64) -> TangentVector {
        self.random_tangent_with(x, &mut rng::derive(seed, "random_tangent"), scale)
    }

    /// Random tangent vector: entries uniform in `[-scale, scale]`, then
    /// projected onto `T_x M`, so the norm never exceeds `scale * sqrt(rows * cols)`.
    pub fn random_tangent_with<R: Rng + ?Sized>(&self, x: &ManifoldPoint, rng: &mut R, scale: f64) -> TangentVector {
        let (r, c) = self.shape();
        let z = Mat::from_fn(r, c, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0));
        TangentVector(self.project_raw(&x.0, &z))
    }
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}
