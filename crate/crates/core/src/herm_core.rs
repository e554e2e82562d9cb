//! Finite-dimensional linear algebra of possibly degenerate Hermitian forms.
//!
//! A form `b` on `C^n` is stored as its Gram matrix `G` with
//! `G[(j, k)] = b(e_k, conj(e_j))`, so that `b(s, conj(t)) = t* G s`.
//! Everything degenerate is handled by passing to the purge `V / Ker b`,
//! where the induced form is non-degenerate, and lifting back with the
//! orthonormal complement of the kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, cr, eye, fro, herm_avg, herm_eig, null_space, null_space_ref, projection_residual, range_basis, rank,
    zeros, CMat, CVec, C64, DEFAULT_RANK_TOL,
};

/// Kernel-containment residuals above this (times `max(1, |f|)`) reject an adjoint.
pub const ADJOINT_KERNEL_TOL: f64 = 1e-8;

/// Hermitian form given by its Gram matrix in a fixed frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianForm {
    #[serde(with = "crate::json::cmat")]
    gram: CMat,
    rank_tol: f64,
}

impl HermitianForm {
    /// Hermitian-averages `gram` on construction.
    pub fn new(gram: CMat) -> Result<Self> {
        Self::with_tol(gram, DEFAULT_RANK_TOL)
    }

    pub fn with_tol(gram: CMat, rank_tol: f64) -> Result<Self> {
        if gram.nrows() != gram.ncols() || gram.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Gram matrix must be square and non-empty, got {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        Ok(Self {
            gram: herm_avg(&gram),
            rank_tol,
        })
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Self::new(linalg::from_real_diag(d)).expect("non-empty diagonal")
    }

    pub fn identity(n: usize) -> Self {
        Self::new(eye(n)).expect("n > 0")
    }

    pub fn zero(n: usize) -> Self {
        Self::new(zeros(n, n)).expect("n > 0")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn rank(&self) -> usize {
        rank(&self.gram, self.rank_tol)
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank() == self.dim()
    }

    /// `b(s, conj(t)) = t* G s`.
    pub fn eval(&self, s: &CVec, t: &CVec) -> C64 {
        (t.adjoint() * &self.gram * s)[(0, 0)]
    }

    /// Pullback `f* b` along a linear map into this space.
    pub fn pullback(&self, f: &CMat) -> HermitianForm {
        let g = f.adjoint() * &self.gram * f;
        HermitianForm::with_tol(g, self.rank_tol).expect("pullback of a square form")
    }

    pub fn scaled(&self, s: f64) -> HermitianForm {
        HermitianForm::with_tol(&self.gram * cr(s), self.rank_tol).expect("same shape")
    }
}

/// Subspace of `C^n`, stored with an orthonormal (standard inner product) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

impl Subspace {
    /// Orthonormalizes the columns of `m`; dependent columns are dropped.
    pub fn span(m: &CMat) -> Self {
        Self {
            basis: range_basis(m, DEFAULT_RANK_TOL),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self { basis: zeros(n, 0) }
    }

    pub fn whole(n: usize) -> Self {
        Self { basis: eye(n) }
    }

    pub(crate) fn from_orthonormal(basis: CMat) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn contains(&self, v: &CMat, tol: f64) -> bool {
        projection_residual(v, &self.basis) <= tol * (1.0 + fro(v))
    }

    pub fn sum_dim(&self, other: &Subspace) -> usize {
        linalg::sum_dim(&self.basis, &other.basis, DEFAULT_RANK_TOL)
    }

    pub fn intersection_dim(&self, other: &Subspace) -> usize {
        self.dim() + other.dim() - self.sum_dim(other)
    }
}

/// Linear map between coordinate spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    pub matrix: CMat,
    pub domain_form: Option<HermitianForm>,
    pub codomain_form: Option<HermitianForm>,
}

impl LinearMap {
    pub fn new(matrix: CMat) -> Self {
        Self {
            matrix,
            domain_form: None,
            codomain_form: None,
        }
    }

    /// Attaches forms after checking shapes.
    pub fn with_forms(matrix: CMat, domain: HermitianForm, codomain: HermitianForm) -> Result<Self> {
        if domain.dim() != matrix.ncols() || codomain.dim() != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} map between forms of dims {} -> {}",
                matrix.nrows(),
                matrix.ncols(),
                domain.dim(),
                codomain.dim()
            )));
        }
        Ok(Self {
            matrix,
            domain_form: Some(domain),
            codomain_form: Some(codomain),
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// The purge `V -> V / Ker b` together with its non-degenerate induced form.
#[derive(Debug, Clone)]
pub struct PurgeResult {
    pub quotient_map: LinearMap,
    pub purged_form: HermitianForm,
    /// Orthonormal lift `V / Ker b -> V` onto the complement of the kernel.
    pub lift: CMat,
}

pub fn kernel(b: &HermitianForm) -> Subspace {
    Subspace::from_orthonormal(null_space(b.gram(), b.rank_tol()))
}

pub fn purge(b: &HermitianForm) -> PurgeResult {
    let u = range_basis(b.gram(), b.rank_tol());
    let purged = u.adjoint() * b.gram() * &u;
    let purged_form = if u.ncols() == 0 {
        // The purge of the zero form is the zero space; represent it by an
        // empty map and a 1x1 placeholder is not meaningful, so keep 0x0.
        HermitianForm {
            gram: zeros(0, 0),
            rank_tol: b.rank_tol(),
        }
    } else {
        HermitianForm::with_tol(purged, b.rank_tol()).expect("square")
    };
    PurgeResult {
        quotient_map: LinearMap::new(u.adjoint()),
        purged_form,
        lift: u,
    }
}

fn check_map_shape(f: &CMat, bv: &HermitianForm, bw: &HermitianForm) -> Result<()> {
    if f.ncols() != bv.dim() || f.nrows() != bw.dim() {
        return Err(Error::DimensionMismatch(format!(
            "map is {}x{}, forms have dims {} -> {}",
            f.nrows(),
            f.ncols(),
            bv.dim(),
            bw.dim()
        )));
    }
    Ok(())
}

/// Norm of the part of `f(Ker b_V)` lying outside `Ker b_W`.
pub fn adjoint_kernel_residual(f: &CMat, bv: &HermitianForm, bw: &HermitianForm) -> f64 {
    let kv = kernel(bv);
    if kv.dim() == 0 {
        return 0.0;
    }
    let kw = kernel(bw);
    projection_residual(&(f * kv.basis()), kw.basis())
}

pub fn admits_adjoint(f: &LinearMap, bv: &HermitianForm, bw: &HermitianForm) -> bool {
    if check_map_shape(&f.matrix, bv, bw).is_err() {
        return false;
    }
    adjoint_kernel_residual(&f.matrix, bv, bw) <= ADJOINT_KERNEL_TOL * fro(&f.matrix).max(1.0)
}

/// Canonical (minimum-norm) adjoint `f†: W -> V` with
/// `b_V(f† x, conj(y)) = b_W(x, conj(f y))`.
pub fn adjoint(f: &LinearMap, bv: &HermitianForm, bw: &HermitianForm) -> Result<LinearMap> {
    adjoint_matrix(&f.matrix, bv, bw).map(LinearMap::new)
}

pub fn adjoint_matrix(f: &CMat, bv: &HermitianForm, bw: &HermitianForm) -> Result<CMat> {
    check_map_shape(f, bv, bw)?;
    let residual = adjoint_kernel_residual(f, bv, bw);
    if residual > ADJOINT_KERNEL_TOL * fro(f).max(1.0) {
        return Err(Error::NoAdjoint { residual });
    }
    let pv = purge(bv);
    let pw = purge(bw);
    if pv.lift.ncols() == 0 || pw.lift.ncols() == 0 {
        return Ok(zeros(bv.dim(), bw.dim()));
    }
    let f_hat = pw.lift.adjoint() * f * &pv.lift;
    let gv_inv = linalg::inv(pv.purged_form.gram());
    let f_hat_dag = gv_inv * f_hat.adjoint() * pw.purged_form.gram();
    Ok(&pv.lift * f_hat_dag * pw.lift.adjoint())
}

/// Max over basis pairs of `|b_V(f† e_i, conj(e_j)) - b_W(e_i, conj(f e_j))|`.
pub fn adjoint_identity_residual(f: &CMat, f_dag: &CMat, bv: &HermitianForm, bw: &HermitianForm) -> f64 {
    // b_V(f† x, conj(y)) = y* G_V f† x ; b_W(x, conj(f y)) = y* f* G_W x
    let lhs = bv.gram() * f_dag;
    let rhs = f.adjoint() * bw.gram();
    (lhs - rhs).iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Dimensions governing the freedom in choosing adjoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AdjointFreedom {
    /// `dim W * dim Ker b_V` when `f` is adjointable.
    pub torsor_dim: Option<usize>,
    /// `dim Ker b_V * (dim W - dim Ker b_W)`.
    pub adjointable_codim: usize,
    /// Codimension measured as the rank of the constraint `f(Ker b_V) ⊂ Ker b_W`.
    pub codim_by_rank: usize,
}

pub fn adjoint_freedom_dims(f: &LinearMap, bv: &HermitianForm, bw: &HermitianForm) -> AdjointFreedom {
    let kv = kernel(bv);
    let kw = kernel(bw);
    let (dv, dw) = (bv.dim(), bw.dim());
    let codim = kv.dim() * (dw - kw.dim());
    // vec(U_W* F K_V) = (K_V^T ⊗ U_W*) vec(F), where U_W spans (Ker b_W)⊥.
    let uw = null_space(&kw.basis().adjoint(), DEFAULT_RANK_TOL);
    let uw = if kw.dim() == 0 { eye(dw) } else { uw };
    let kvt = kv.basis().transpose();
    let uwa = uw.adjoint();
    let (a_r, a_c) = kvt.shape();
    let (b_r, b_c) = uwa.shape();
    let mut constraint = zeros(a_r * b_r, a_c * b_c);
    for i in 0..a_r {
        for j in 0..a_c {
            let s = kvt[(i, j)];
            for k in 0..b_r {
                for l in 0..b_c {
                    constraint[(i * b_r + k, j * b_c + l)] = s * uwa[(k, l)];
                }
            }
        }
    }
    let codim_by_rank = if constraint.nrows() == 0 || constraint.ncols() == 0 {
        0
    } else {
        rank(&constraint, DEFAULT_RANK_TOL)
    };
    let torsor_dim = if admits_adjoint(f, bv, bw) {
        Some(dw * kv.dim())
    } else {
        None
    };
    debug_assert_eq!(dv, f.cols());
    AdjointFreedom {
        torsor_dim,
        adjointable_codim: codim,
        codim_by_rank,
    }
}

/// `S⊥ = { v | b(v, conj(w)) = 0 for all w in S }`.
pub fn orthogonal_complement(s: &Subspace, b: &HermitianForm) -> Result<Subspace> {
    if s.ambient_dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace of C^{} against a form on C^{}",
            s.ambient_dim(),
            b.dim()
        )));
    }
    if s.dim() == 0 {
        return Ok(Subspace::whole(b.dim()));
    }
    // b(v, conj(w)) = w* G v
    let m = s.basis().adjoint() * b.gram();
    Ok(Subspace::from_orthonormal(null_space_ref(&m, b.rank_tol(), fro(b.gram()))))
}

/// Dimension identities relating `S`, `S⊥` and `Ker b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecompositionDims {
    pub ambient: usize,
    pub dim_s: usize,
    pub dim_perp: usize,
    pub dim_sum: usize,
    pub dim_intersection: usize,
    pub dim_s_cap_ker: usize,
    pub ker_in_perp: bool,
}

impl DecompositionDims {
    pub fn holds(&self) -> bool {
        self.ker_in_perp
            && self.dim_sum == self.ambient
            && self.dim_intersection == self.dim_s_cap_ker
            && self.dim_sum + self.dim_intersection == self.dim_s + self.dim_perp
    }
}

pub fn decomposition_dims(s: &Subspace, b: &HermitianForm) -> Result<DecompositionDims> {
    let perp = orthogonal_complement(s, b)?;
    let ker = kernel(b);
    let ker_in_perp = ker.dim() == 0 || perp.contains(ker.basis(), 1e-8);
    Ok(DecompositionDims {
        ambient: b.dim(),
        dim_s: s.dim(),
        dim_perp: perp.dim(),
        dim_sum: s.sum_dim(&perp),
        dim_intersection: s.intersection_dim(&perp),
        dim_s_cap_ker: s.intersection_dim(&ker),
        ker_in_perp,
    })
}

/// Induced form on a quotient together with the lift discrepancy check.
#[derive(Debug, Clone)]
pub struct QuotientForm {
    pub form: HermitianForm,
    /// Lifts `x_i ∈ (Ker q)⊥` with `q x_i = e_i`, as columns.
    pub lift: CMat,
    /// Difference between Gram matrices computed from two different lifts.
    pub lift_discrepancy: f64,
}

pub fn quotient_form(qmap: &LinearMap, bv: &HermitianForm) -> Result<HermitianForm> {
    quotient_form_checked(&qmap.matrix, bv).map(|q| q.form)
}

pub fn quotient_form_checked(q: &CMat, bv: &HermitianForm) -> Result<QuotientForm> {
    let (p, n) = q.shape();
    if n != bv.dim() {
        return Err(Error::DimensionMismatch(format!(
            "quotient map has {n} columns, form has dim {}",
            bv.dim()
        )));
    }
    let rk = rank(q, bv.rank_tol());
    if rk < p || p == 0 {
        return Err(Error::NotSurjective { rank: rk, rows: p });
    }
    let s = Subspace::from_orthonormal(null_space(q, bv.rank_tol()));
    let perp = orthogonal_complement(&s, bv)?;
    let w = perp.basis();
    let qw = q * w;
    let lift = w * linalg::pinv(&qw, bv.rank_tol());
    let gram = lift.adjoint() * bv.gram() * &lift;

    // Second lift: shift by elements of S⊥ ∩ Ker q = S ∩ Ker b_V.
    let free = null_space_ref(&qw, bv.rank_tol(), fro(q));
    let lift2 = if free.ncols() == 0 {
        lift.clone()
    } else {
        let coeffs = CMat::from_fn(free.ncols(), p, |i, j| linalg::c(1.0 + i as f64, 0.5 * j as f64));
        &lift + w * free * coeffs
    };
    let gram2 = lift2.adjoint() * bv.gram() * &lift2;
    let lift_discrepancy = fro(&(&gram - &gram2));
    Ok(QuotientForm {
        form: HermitianForm::with_tol(gram, bv.rank_tol())?,
        lift,
        lift_discrepancy,
    })
}

/// `tr(ĝ† f̂)` computed on the purged spaces.
pub fn hom_form(f: &LinearMap, g: &LinearMap, bv: &HermitianForm, bw: &HermitianForm) -> Result<C64> {
    for m in [&f.matrix, &g.matrix] {
        check_map_shape(m, bv, bw)?;
        let residual = adjoint_kernel_residual(m, bv, bw);
        if residual > ADJOINT_KERNEL_TOL * fro(m).max(1.0) {
            return Err(Error::NoAdjoint { residual });
        }
    }
    let pv = purge(bv);
    let pw = purge(bw);
    if pv.lift.ncols() == 0 || pw.lift.ncols() == 0 {
        return Ok(cr(0.0));
    }
    let f_hat = pw.lift.adjoint() * &f.matrix * &pv.lift;
    let g_hat = pw.lift.adjoint() * &g.matrix * &pv.lift;
    let g_hat_dag = linalg::inv(pv.purged_form.gram()) * g_hat.adjoint() * pw.purged_form.gram();
    Ok(linalg::trace(&(g_hat_dag * f_hat)))
}

fn check_positive(h: &CMat, tol: f64) -> Result<()> {
    let ratio = linalg::pd_ratio(h);
    if ratio <= tol {
        return Err(Error::NotPositive { ratio });
    }
    Ok(())
}

/// Gram matrix of `q = (h⁻¹b₂)*b₁ + (h⁻¹b₁)*b₂` with `h = b₁ + b₂`.
pub fn sum_quotient_gram(g1: &CMat, g2: &CMat, tol: f64) -> Result<CMat> {
    let h = g1 + g2;
    check_positive(&h, tol)?;
    let hinv = linalg::inv(&h);
    let p2 = &hinv * g2;
    let p1 = &hinv * g1;
    Ok(herm_avg(&(p2.adjoint() * g1 * &p2 + p1.adjoint() * g2 * &p1)))
}

pub fn sum_quotient_form(b1: &HermitianForm, b2: &HermitianForm) -> Result<HermitianForm> {
    if b1.dim() != b2.dim() {
        return Err(Error::DimensionMismatch("summands of different dimension".into()));
    }
    let q = sum_quotient_gram(b1.gram(), b2.gram(), b1.rank_tol())?;
    HermitianForm::with_tol(q, b1.rank_tol())
}

/// The family `q_λ` for `b₁ + e^λ b₂` and its limit as `λ → ∞`.
#[derive(Debug, Clone)]
pub struct LimitForm {
    pub lambdas: Vec<f64>,
    pub q_values: Vec<HermitianForm>,
    pub q_infinity: HermitianForm,
    /// The limit computed as `(j j†)* b₁` for the inclusion `j` of the
    /// `h`-orthogonal complement of `Ker b₂`.
    pub q_infinity_projected: HermitianForm,
    /// `‖q_λ - q_∞‖` per grid entry.
    pub errors: Vec<f64>,
    /// Simultaneous-diagonalization coefficients `(x_j, y_j)` with `x + y = 1`.
    pub coefficients: Vec<(f64, f64)>,
}

impl LimitForm {
    pub fn projection_residual(&self) -> f64 {
        fro(&(self.q_infinity.gram() - self.q_infinity_projected.gram()))
    }

    /// Ratios `err[i+1] / err[i]` (skipping vanishing errors).
    pub fn error_ratios(&self) -> Vec<f64> {
        self.errors
            .windows(2)
            .filter(|w| w[0] > 1e-300)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Coefficients `y_j` at or below this count as zero when taking the limit.
const LIMIT_ZERO_TOL: f64 = 1e-8;

pub fn limit_form(b1: &HermitianForm, b2: &HermitianForm, lambda_grid: &[f64]) -> Result<LimitForm> {
    if b1.dim() != b2.dim() {
        return Err(Error::DimensionMismatch("summands of different dimension".into()));
    }
    let tol = b1.rank_tol();
    let h0 = b1.gram() + b2.gram();
    check_positive(&h0, tol)?;

    let q_values = lambda_grid
        .iter()
        .map(|&l| sum_quotient_form(b1, &b2.scaled(l.exp())))
        .collect::<Result<Vec<_>>>()?;

    // h0 = L L*, diagonalize L⁻¹ G₁ L⁻*.
    let chol = h0.clone().cholesky().ok_or(Error::NotPositive { ratio: 0.0 })?;
    let l = chol.l();
    let linv = linalg::inv(&l);
    let m = &linv * b1.gram() * linv.adjoint();
    let (mu, u) = herm_eig(&m);
    let coefficients: Vec<(f64, f64)> = mu.iter().map(|&x| (x, 1.0 - x)).collect();
    let limit: Vec<f64> = coefficients
        .iter()
        .map(|&(x, y)| if y > LIMIT_ZERO_TOL { x } else { 0.0 })
        .collect();
    let lu = &l * &u;
    let q_inf = &lu * linalg::from_real_diag(&limit) * lu.adjoint();
    let q_infinity = HermitianForm::with_tol(q_inf, tol)?;

    let h0_form = HermitianForm::with_tol(h0, tol)?;
    let complement = orthogonal_complement(&kernel(b2), &h0_form)?;
    let j = complement.basis().clone();
    let q_infinity_projected = if j.ncols() == 0 {
        HermitianForm::zero(b1.dim())
    } else {
        let bc = h0_form.pullback(&j);
        let j_dag = adjoint_matrix(&j, &bc, &h0_form)?;
        let p = &j * j_dag;
        b1.pullback(&p)
    };

    let errors = q_values
        .iter()
        .map(|q| fro(&(q.gram() - q_infinity.gram())))
        .collect();

    Ok(LimitForm {
        lambdas: lambda_grid.to_vec(),
        q_values,
        q_infinity,
        q_infinity_projected,
        errors,
        coefficients,
    })
}

/// `s ~ t` modulo `Ker b`: the part of `s - t` orthogonal to the kernel is negligible.
pub fn equiv_mod_kernel(s: &CVec, t: &CVec, b: &HermitianForm) -> Result<bool> {
    if s.len() != b.dim() || t.len() != b.dim() {
        return Err(Error::DimensionMismatch("vectors and form differ in dimension".into()));
    }
    let d = CMat::from_column_slice(s.len(), 1, (s - t).as_slice());
    let ker = kernel(b);
    let outside = projection_residual(&d, ker.basis());
    Ok(outside <= 1e-9 * (1.0 + fro(&d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_real_rows};

    fn form(rows: &[&[f64]]) -> HermitianForm {
        HermitianForm::new(from_real_rows(rows)).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let k = kernel(&HermitianForm::from_real_diag(&[1.0, 0.0]));
        assert_eq!(k.dim(), 1);
        assert!((k.basis()[(1, 0)].norm() - 1.0).abs() < 1e-14);

        assert_eq!(kernel(&HermitianForm::identity(3)).dim(), 0);

        let k = kernel(&form(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert_eq!(k.dim(), 1);
        let v = k.basis().column(0);
        let s = 1.0 / 2f64.sqrt();
        // span{(1,-1)/√2} up to a phase
        assert!((v[0] + v[1]).norm() < 1e-14);
        assert!((v[0].norm() - s).abs() < 1e-14);
    }

    #[test]
    fn purge_examples() {
        let p = purge(&HermitianForm::from_real_diag(&[1.0, 0.0]));
        assert_eq!(p.quotient_map.rows(), 1);
        assert!((p.purged_form.gram()[(0, 0)] - cr(1.0)).norm() < 1e-14);

        let p = purge(&form(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert_eq!(p.purged_form.dim(), 1);
        assert!((p.purged_form.gram()[(0, 0)] - cr(2.0)).norm() < 1e-13);
        assert!(p.purged_form.is_nondegenerate());

        let b = form(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let p = purge(&b);
        assert_eq!(p.quotient_map.rows(), 2);
        assert_eq!(rank(&p.quotient_map.matrix, 1e-10), 2);
    }

    #[test]
    fn purge_is_hermitian_morphism() {
        let b = form(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 3.0]]);
        let p = purge(&b);
        let q = &p.quotient_map.matrix;
        let back = q.adjoint() * p.purged_form.gram() * q;
        assert!(fro(&(back - b.gram())) < 1e-10);
    }

    #[test]
    fn admits_adjoint_examples() {
        let bv = HermitianForm::from_real_diag(&[1.0, 0.0]);
        let bw = HermitianForm::identity(1);
        assert!(admits_adjoint(&LinearMap::new(from_real_rows(&[&[1.0, 0.0]])), &bv, &bw));
        assert!(!admits_adjoint(&LinearMap::new(from_real_rows(&[&[0.0, 1.0]])), &bv, &bw));
        let f = LinearMap::new(from_real_rows(&[&[3.0, -2.0]]));
        assert!(admits_adjoint(&f, &HermitianForm::identity(2), &HermitianForm::zero(1)));
    }

    #[test]
    fn adjoint_examples() {
        let bv = HermitianForm::from_real_diag(&[1.0, 0.0]);
        let bw = HermitianForm::identity(1);
        let f = LinearMap::new(from_real_rows(&[&[1.0, 0.0]]));
        let fd = adjoint(&f, &bv, &bw).unwrap().matrix;
        assert!(fro(&(fd - from_real_rows(&[&[1.0], &[0.0]]))) < 1e-14);

        let b = form(&[&[2.0, 0.3], &[0.3, 1.0]]);
        let id = LinearMap::new(eye(2));
        assert!(fro(&(adjoint(&id, &b, &b).unwrap().matrix - eye(2))) < 1e-13);

        let f = CMat::from_fn(2, 3, |i, j| c(i as f64 + 1.0, j as f64 - 1.0));
        let fd = adjoint(&LinearMap::new(f.clone()), &HermitianForm::identity(3), &HermitianForm::identity(2))
            .unwrap()
            .matrix;
        assert!(fro(&(fd - f.adjoint())) < 1e-13);

        let bad = LinearMap::new(from_real_rows(&[&[0.0, 1.0]]));
        assert!(matches!(adjoint(&bad, &bv, &bw), Err(Error::NoAdjoint { .. })));
    }

    #[test]
    fn adjoint_freedom_examples() {
        let f = LinearMap::new(from_real_rows(&[&[1.0, 0.0]]));
        let d = adjoint_freedom_dims(&f, &HermitianForm::from_real_diag(&[1.0, 0.0]), &HermitianForm::identity(1));
        assert_eq!(d.adjointable_codim, 1);
        assert_eq!(d.codim_by_rank, 1);
        assert_eq!(d.torsor_dim, Some(1));

        let d = adjoint_freedom_dims(&LinearMap::new(eye(2)), &HermitianForm::identity(2), &HermitianForm::identity(2));
        assert_eq!((d.torsor_dim, d.adjointable_codim, d.codim_by_rank), (Some(0), 0, 0));

        let f = LinearMap::new(zeros(2, 3));
        let d = adjoint_freedom_dims(
            &f,
            &HermitianForm::from_real_diag(&[1.0, 0.0, 0.0]),
            &HermitianForm::from_real_diag(&[1.0, 0.0]),
        );
        assert_eq!(d.adjointable_codim, 2);
        assert_eq!(d.codim_by_rank, 2);

        let bad = LinearMap::new(from_real_rows(&[&[0.0, 1.0]]));
        let d = adjoint_freedom_dims(&bad, &HermitianForm::from_real_diag(&[1.0, 0.0]), &HermitianForm::identity(1));
        assert_eq!(d.torsor_dim, None);
    }

    #[test]
    fn orthogonal_complement_examples() {
        let b = HermitianForm::from_real_diag(&[1.0, 0.0]);
        let e1 = Subspace::span(&from_real_rows(&[&[1.0], &[0.0]]));
        let p = orthogonal_complement(&e1, &b).unwrap();
        assert_eq!(p.dim(), 1);
        assert!(p.contains(&from_real_rows(&[&[0.0], &[1.0]]), 1e-12));

        let e2 = Subspace::span(&from_real_rows(&[&[0.0], &[1.0]]));
        assert_eq!(orthogonal_complement(&e2, &b).unwrap().dim(), 2);

        let s = Subspace::span(&from_real_rows(&[&[1.0], &[1.0], &[0.0]]));
        let p = orthogonal_complement(&s, &HermitianForm::identity(3)).unwrap();
        assert_eq!(p.dim(), 2);
        assert!(fro(&(s.basis().adjoint() * p.basis())) < 1e-14);
    }

    #[test]
    fn quotient_form_examples() {
        let q = quotient_form_checked(&from_real_rows(&[&[1.0, -1.0]]), &HermitianForm::from_real_diag(&[1.0, 2.0]))
            .unwrap();
        assert!((q.form.gram()[(0, 0)] - cr(2.0 / 3.0)).norm() < 1e-13);

        let q = quotient_form(&LinearMap::new(from_real_rows(&[&[1.0, 0.0]])), &HermitianForm::identity(2)).unwrap();
        assert!((q.gram()[(0, 0)] - cr(1.0)).norm() < 1e-13);

        let q = quotient_form_checked(&from_real_rows(&[&[0.0, 1.0]]), &HermitianForm::from_real_diag(&[1.0, 0.0]))
            .unwrap();
        assert!(q.form.gram()[(0, 0)].norm() < 1e-13);
        assert!(q.lift_discrepancy < 1e-10);

        let r = quotient_form(&LinearMap::new(from_real_rows(&[&[1.0, 1.0], &[2.0, 2.0]])), &HermitianForm::identity(2));
        assert!(matches!(r, Err(Error::NotSurjective { .. })));
    }

    #[test]
    fn hom_form_examples() {
        let bv = HermitianForm::from_real_diag(&[1.0, 0.0]);
        let bw = HermitianForm::identity(1);
        let f = LinearMap::new(from_real_rows(&[&[1.0, 0.0]]));
        assert!((hom_form(&f, &f, &bv, &bw).unwrap() - cr(1.0)).norm() < 1e-13);
        let zero = LinearMap::new(zeros(1, 2));
        assert!(hom_form(&f, &zero, &bv, &bw).unwrap().norm() < 1e-14);
        let id = LinearMap::new(eye(2));
        let i2 = HermitianForm::identity(2);
        assert!((hom_form(&id, &id, &i2, &i2).unwrap() - cr(2.0)).norm() < 1e-13);
    }

    #[test]
    fn sum_quotient_examples() {
        let q = sum_quotient_form(&HermitianForm::from_real_diag(&[1.0]), &HermitianForm::from_real_diag(&[2.0])).unwrap();
        assert!((q.gram()[(0, 0)] - cr(2.0 / 3.0)).norm() < 1e-14);

        let b1 = form(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let q = sum_quotient_form(&b1, &HermitianForm::zero(2)).unwrap();
        assert!(fro(q.gram()) < 1e-14);

        let q = sum_quotient_form(&HermitianForm::from_real_diag(&[1.0, 0.0]), &HermitianForm::from_real_diag(&[0.0, 1.0]))
            .unwrap();
        assert!(fro(q.gram()) < 1e-14);

        let r = sum_quotient_form(&HermitianForm::from_real_diag(&[1.0, 0.0]), &HermitianForm::from_real_diag(&[1.0, 0.0]));
        assert!(matches!(r, Err(Error::NotPositive { .. })));
    }

    #[test]
    fn limit_form_examples() {
        let lf = limit_form(&HermitianForm::from_real_diag(&[1.0]), &HermitianForm::from_real_diag(&[2.0]), &[0.0]).unwrap();
        assert!((lf.q_values[0].gram()[(0, 0)] - cr(2.0 / 3.0)).norm() < 1e-14);
        assert!((lf.q_infinity.gram()[(0, 0)] - cr(1.0)).norm() < 1e-12);

        let b1 = form(&[&[2.0, 0.5], &[0.5, 1.0]]);
        let lf = limit_form(&b1, &HermitianForm::zero(2), &[0.0, 3.0]).unwrap();
        assert!(lf.q_values.iter().all(|q| fro(q.gram()) < 1e-14));
        assert!(fro(lf.q_infinity.gram()) < 1e-12);

        let lf = limit_form(
            &HermitianForm::from_real_diag(&[1.0, 3.0]),
            &HermitianForm::from_real_diag(&[2.0, 0.0]),
            &[2.0, 4.0, 6.0, 8.0],
        )
        .unwrap();
        assert!(fro(&(lf.q_infinity.gram() - linalg::from_real_diag(&[1.0, 0.0]))) < 1e-10);
        assert!(lf.projection_residual() < 1e-8);
    }

    #[test]
    fn equiv_mod_kernel_examples() {
        let v = |a: f64, b: f64| CVec::from_vec(vec![cr(a), cr(b)]);
        let b = HermitianForm::from_real_diag(&[1.0, 0.0]);
        assert!(equiv_mod_kernel(&v(1.0, 5.0), &v(1.0, -3.0), &b).unwrap());
        assert!(!equiv_mod_kernel(&v(1.0, 5.0), &v(1.0, -3.0), &HermitianForm::identity(2)).unwrap());
        let b = form(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(equiv_mod_kernel(&v(1.0, -1.0), &v(0.0, 0.0), &b).unwrap());
    }
}
