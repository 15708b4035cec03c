use crate::Mat;

/// `Z - X sym(X^T Z)`.
pub(super) fn project(x: &Mat, z: &Mat) -> Mat {
    let xtz = x.transpose() * z;
    let sym = (&xtz + xtz.transpose()) * 0.5;
    z - x * sym
}

/// Q factor of a thin QR factorization with the sign convention
/// `diag(R) >= 0`, which makes the factor unique for full-rank input.
pub fn qf(a: &Mat) -> Mat {
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// QR retraction `qf(X + U)`, re-orthonormalized once more if the
/// orthonormality drift exceeds the point tolerance.
pub(super) fn retract(x: &Mat, u: &Mat) -> Mat {
    let q = qf(&(x + u));
    let k = q.ncols();
    if (q.transpose() * &q - Mat::identity(k, k)).norm() > super::POINT_TOL {
        qf(&q)
    } else {
        q
    }
}

/// Orthonormal basis of the orthogonal complement of `span(X)`, `d x (d - r)`.
fn complement(x: &Mat) -> Mat {
    let (d, r) = x.shape();
    let mut aug = Mat::zeros(d, r + d);
    aug.columns_mut(0, r).copy_from(x);
    aug.columns_mut(r, d).fill_with_identity();
    let q = aug.qr().q();
    q.columns(r, d - r).into_owned()
}

/// Rotation transport: applies the orthogonal matrix
/// `O = Y X^T + polar((I - Y Y^T) X_perp) X_perp^T`, which maps `X` to `Y`
/// exactly and the complement of `span(X)` onto the complement of
/// `span(Y)` with the smallest rotation. `O` does not depend on the choice
/// of `X_perp`, is the identity when `X = Y`, and since `Y^T O V = X^T V`
/// it carries `T_X` onto `T_Y` as a linear isometry.
pub(super) fn transport(x: &Mat, y: &Mat, v: &Mat) -> Mat {
    let (d, r) = x.shape();
    let xtv = x.transpose() * v;
    let mut out = y * &xtv;
    if d > r {
        let xp = complement(x);
        let z = &xp - y * (y.transpose() * &xp);
        let svd = z.svd(true, true);
        let polar = svd.u.expect("svd u") * svd.v_t.expect("svd v_t");
        out += polar * (xp.transpose() * v);
    }
    // round-off cleanup: keep the result exactly skew against Y
    project(y, &out)
}

/// Tangent projection at `R_X(U)` followed by rescaling to the input norm.
/// Preserves norms, but is neither linear nor inner-product preserving;
/// kept as a reference for measuring transport distortion.
pub fn projection_rescaled_transport(y: &Mat, v: &Mat) -> Mat {
    let p = project(y, v);
    let pn = p.norm();
    if pn == 0.0 {
        return p;
    }
    p * (v.norm() / pn)
}
