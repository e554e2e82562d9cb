//! Dense complex linear-algebra helpers shared by every module.
//!
//! Rank decisions all go through [`svd_sorted`] with a relative cutoff: a
//! singular value counts as zero when it is at most `tol * sigma_max`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default relative singular-value cutoff.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(M + M*) / 2`.
pub fn herm_avg(m: &CMat) -> CMat {
    (m + m.adjoint()) * cr(0.5)
}

pub fn from_real_diag(d: &[f64]) -> CMat {
    let n = d.len();
    let mut m = zeros(n, n);
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = cr(x);
    }
    m
}

/// Builds a matrix from rows of real entries.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    CMat::from_fn(r, c, |i, j| cr(rows[i][j]))
}

/// Thin SVD with singular values sorted in decreasing order.
///
/// Returns `(u, sigma, v)` with `m = u * diag(sigma) * v*`.
pub fn svd_sorted(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return (zeros(r, 0), vec![], zeros(c, 0));
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v requested").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u = CMat::from_fn(r, k, |i, j| u[(i, order[j])]);
    let v = CMat::from_fn(c, k, |i, j| v[(i, order[j])]);
    (u, sigma, v)
}

/// Number of singular values above `tol * sigma_max`.
pub fn rank_of(sigma: &[f64], tol: f64) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax <= f64::MIN_POSITIVE {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * smax).count()
}

pub fn rank(m: &CMat, tol: f64) -> usize {
    let (_, s, _) = svd_sorted(m);
    rank_of(&s, tol)
}

/// Orthonormal basis (standard inner product) of the null space of `m`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    null_space_ref(m, tol, 0.0)
}

/// Like [`null_space`], but singular values are also compared against
/// `tol * reference`. Use when `m` is a product whose entries may cancel to
/// rounding noise, so that its own largest singular value is meaningless.
pub fn null_space_ref(m: &CMat, tol: f64, reference: f64) -> CMat {
    let (r, c) = m.shape();
    if c == 0 {
        return zeros(0, 0);
    }
    // Pad to a square matrix so the SVD returns a full set of right vectors.
    let padded = if r < c {
        let mut p = zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (u, s, v) = svd_sorted(&padded);
    let floor = tol * reference;
    let rk = rank_of(&s, tol).min(s.iter().filter(|&&x| x > floor).count());
    let basis = v.columns(rk, c - rk).into_owned();
    if rk == 0 || rk == c {
        return basis;
    }
    // The SVD leaves residuals near 1e-13; project once more and re-orthonormalize.
    let mut row_inv = zeros(c, padded.nrows());
    for i in 0..rk {
        row_inv += (v.column(i) * u.column(i).adjoint()) * cr(1.0 / s[i]);
    }
    let refined = &basis - row_inv * (&padded * &basis);
    orthonormalize(&refined)
}

/// Orthonormal columns spanning the same space as the (full-rank) input.
fn orthonormalize(m: &CMat) -> CMat {
    m.clone().qr().q()
}

/// Orthonormal basis of the column space of `m`.
pub fn range_basis(m: &CMat, tol: f64) -> CMat {
    let (u, s, _) = svd_sorted(m);
    let rk = rank_of(&s, tol);
    u.columns(0, rk).into_owned()
}

/// Moore–Penrose pseudoinverse with a relative singular-value cutoff.
pub fn pinv(m: &CMat, tol: f64) -> CMat {
    let (r, c) = m.shape();
    let (u, s, v) = svd_sorted(m);
    let rk = rank_of(&s, tol);
    let mut out = zeros(c, r);
    for i in 0..rk {
        let ui = u.column(i);
        let vi = v.column(i);
        out += (vi * ui.adjoint()) * cr(1.0 / s[i]);
    }
    // Newton-Schulz steps tighten the SVD's ~1e-13 residual.
    if rk > 0 {
        for _ in 0..2 {
            out = &out * cr(2.0) - &out * m * &out;
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], zeros(0, 0));
    }
    let e = SymmetricEigen::new(herm_avg(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Ratio of the smallest to the largest eigenvalue magnitude (signed by the smallest).
pub fn pd_ratio(m: &CMat) -> f64 {
    let (vals, _) = herm_eig(m);
    let max = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    vals[0] / max
}

/// `true` when the smallest eigenvalue exceeds `tol` times the largest.
pub fn is_pd(m: &CMat, tol: f64) -> bool {
    m.nrows() > 0 && pd_ratio(m) > tol
}

/// Inverse of a (numerically) invertible square matrix; falls back to the
/// pseudoinverse if LU fails.
pub fn inv(m: &CMat) -> CMat {
    m.clone()
        .try_inverse()
        .unwrap_or_else(|| pinv(m, DEFAULT_RANK_TOL))
}

/// `[a | b]`
pub fn hstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

/// `[a ; b]`
pub fn vstack(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

/// Residual of projecting the columns of `x` onto the span of the
/// orthonormal columns of `basis`.
pub fn projection_residual(x: &CMat, basis: &CMat) -> f64 {
    if basis.ncols() == 0 {
        return fro(x);
    }
    fro(&(x - basis * (basis.adjoint() * x)))
}

/// Dimension of the sum of two column spans.
pub fn sum_dim(a: &CMat, b: &CMat, tol: f64) -> usize {
    if a.ncols() + b.ncols() == 0 {
        return 0;
    }
    rank(&hstack(a, b), tol)
}

pub fn trace(m: &CMat) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix_is_complete() {
        let m = from_real_rows(&[&[1.0, 1.0, 0.0]]);
        let n = null_space(&m, DEFAULT_RANK_TOL);
        assert_eq!(n.ncols(), 2);
        assert!(fro(&(&m * &n)) < 1e-14);
        assert!(fro(&(n.adjoint() * &n - eye(2))) < 1e-14);
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let p = pinv(&m, DEFAULT_RANK_TOL);
        assert!(fro(&(&p - from_real_rows(&[&[0.25, 0.25], &[0.25, 0.25]]))) < 1e-14);
    }

    #[test]
    fn svd_is_sorted() {
        let m = from_real_diag(&[1.0, 3.0, 2.0]);
        let (_, s, _) = svd_sorted(&m);
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[2] - 1.0).abs() < 1e-14);
    }
}
