use crate::Mat;

/// Metric-projection retraction `(x + u) / |x + u|`.
pub(super) fn retract(x: &Mat, u: &Mat) -> Mat {
    let y = x + u;
    let n = y.norm();
    y / n
}

/// Parallel transport of `v in T_x S` along the minimal geodesic from `x`
/// to `y`: `v - (y^T v) / (1 + x^T y) (x + y)`. Undefined for antipodal
/// points, which a metric-projection retraction never reaches.
pub(super) fn transport(x: &Mat, y: &Mat, v: &Mat) -> Mat {
    let c = 1.0 + x.dot(y);
    let out = v - (x + y) * (y.dot(v) / c);
    // remove the O(eps) normal component left by round-off
    &out - y * y.dot(&out)
}

/// Follows the great circle from `x` with initial velocity `u` for arc
/// length `|u|` and parallel-transports `v` along it. Returns the end point
/// and the transported vector.
///
/// This is the exponential-map geometry; the solvers use the retraction
/// above, whose end point sits at arc length `atan |u|`.
pub fn parallel_transport_along_geodesic(x: &Mat, u: &Mat, v: &Mat) -> (Mat, Mat) {
    let theta = u.norm();
    if theta == 0.0 {
        return (x.clone(), v.clone());
    }
    let dir = u / theta;
    let y = x * theta.cos() + &dir * theta.sin();
    let a = dir.dot(v);
    let tv = v + (&dir * (theta.cos() - 1.0) - x * theta.sin()) * a;
    (y, tv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Rotation by `theta` in the plane spanned by orthonormal `a`, `b`,
    /// identity on the complement.
    fn plane_rotation(a: &Mat, b: &Mat, theta: f64) -> Mat {
        let d = a.nrows();
        let (c, s) = (theta.cos(), theta.sin());
        Mat::identity(d, d) + (a * a.transpose() + b * b.transpose()) * (c - 1.0) + (b * a.transpose() - a * b.transpose()) * s
    }

    fn e(i: usize) -> Mat {
        let mut m = Mat::zeros(3, 1);
        m[i] = 1.0;
        m
    }

    #[test]
    fn quarter_turn_example() {
        let u = e(1) * std::f64::consts::FRAC_PI_2;
        let (y, t3) = parallel_transport_along_geodesic(&e(0), &u, &e(2));
        assert_abs_diff_eq!(y, e(1), epsilon = 1e-15);
        assert_abs_diff_eq!(t3, e(2), epsilon = 1e-15);
        let (_, t2) = parallel_transport_along_geodesic(&e(0), &u, &e(1));
        assert_abs_diff_eq!(t2, -e(0), epsilon = 1e-15);
    }

    #[test]
    fn geodesic_transport_matches_rotation() {
        let mut r = crate::rng::derive(4, "sphere_rotation_oracle");
        for _ in 0..50 {
            let x = crate::manifold::gaussian(5, 1, &mut r);
            let x = &x / x.norm();
            let project = |z: Mat| &z - &x * x.dot(&z);
            let u = project(crate::manifold::gaussian(5, 1, &mut r));
            let v = project(crate::manifold::gaussian(5, 1, &mut r));
            let theta = u.norm();
            let rot = plane_rotation(&x, &(&u / theta), theta);
            let (y, tv) = parallel_transport_along_geodesic(&x, &u, &v);
            assert_abs_diff_eq!(y, &rot * &x, epsilon = 1e-12);
            assert_abs_diff_eq!(tv, &rot * &v, epsilon = 1e-12);
        }
    }

    #[test]
    fn endpoint_transport_agrees_with_geodesic_transport() {
        // the retraction's end point lies on the same great circle at arc
        // length atan |u|
        let mut r = crate::rng::derive(5, "sphere_endpoint_transport");
        for _ in 0..50 {
            let x = crate::manifold::gaussian(4, 1, &mut r);
            let x = &x / x.norm();
            let project = |z: Mat| &z - &x * x.dot(&z);
            let u = project(crate::manifold::gaussian(4, 1, &mut r));
            let v = project(crate::manifold::gaussian(4, 1, &mut r));
            let y = retract(&x, &u);
            let along = &u * (u.norm().atan() / u.norm());
            let (y_geo, tv_geo) = parallel_transport_along_geodesic(&x, &along, &v);
            assert_abs_diff_eq!(y, y_geo, epsilon = 1e-12);
            assert_abs_diff_eq!(transport(&x, &y, &v), tv_geo, epsilon = 1e-12);
        }
    }
}
