//! Short exact sequences `0 → S → E → Q → 0` on a chart.
//!
//! `S` is framed by the columns of the holomorphic inclusion `j(z)` and `Q`
//! by the holomorphic quotient map `q(z) = [0 I] [j(z) C]⁻¹`, where `C` is
//! the standard orthonormal complement of the column space of `j` at the
//! chart center. The induced forms are `G_S = j* G_E j` and `b_Q` from
//! [`quotient_form_checked`]. Curvature identities are compared after
//! contraction with the relevant Gram matrix.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::chart_calc::fields::{FnSource, SumSource};
use crate::chart_calc::{
    chern_connection, curvature_tensor, fd_pair, ChartField, CurvatureAt, Domain, KernelPerturbation,
};
use crate::error::{Error, Result};
use crate::herm_core::{adjoint_matrix, quotient_form_checked, HermitianForm};
use crate::jet::MatJet;
use crate::linalg::{cr, eye, fro, herm_avg, hstack, inv, null_space, pd_ratio, pinv, rank, zeros, CMat, C64};
use crate::sampling::{random_cmat, sample_rng};

type HoloMatFn = Arc<dyn Fn(&[C64]) -> MatJet + Send + Sync>;

/// Step for differentiating pointwise-exact quantities.
const SEQ_STEP: f64 = 1e-4;
/// Holomorphicity tolerance for `∂̄j`.
const HOLO_TOL: f64 = 1e-8;

#[derive(Clone)]
pub struct ExactSeqChart {
    ambient: ChartField,
    inclusion: HoloMatFn,
    complement: CMat,
    sub: ChartField,
    quotient: ChartField,
}

impl std::fmt::Debug for ExactSeqChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactSeqChart")
            .field("ambient", &self.ambient.label())
            .field("rank", &self.ambient.frame_rank())
            .field("sub_rank", &self.sub_rank())
            .finish()
    }
}

/// Pointwise data of the sequence; every entry is exact (no differencing).
#[derive(Debug, Clone)]
pub struct SeqFrames {
    pub j: CMat,
    pub dj: Vec<CMat>,
    pub q: CMat,
    pub b_e: HermitianForm,
    pub b_s: HermitianForm,
    pub b_q: HermitianForm,
    /// `j† : E → S`
    pub j_dag: CMat,
    /// `q† : Q → E`
    pub q_dag: CMat,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondFundamentalFormAt {
    #[serde(with = "crate::json::cvec")]
    pub point: Vec<C64>,
    /// `σ_α : S → Q`, `(r-k)×k`.
    #[serde(skip)]
    pub sigma: Vec<CMat>,
    /// `σ†_β : Q → S`, adjoint of `σ_β`.
    #[serde(skip)]
    pub sigma_dagger: Vec<CMat>,
    /// `max_β |q ∂̄_β j|`, the (0,1)-part of `σ`.
    pub dbar_residual: f64,
    /// `max_α |G_Q σ_α K|` for a basis `K` of `Ker b_S`.
    pub kernel_residual: f64,
}

impl ExactSeqChart {
    /// `inclusion` must return the holomorphic jet of `j` (only `val` and `d` are read).
    pub fn new(ambient: ChartField, inclusion: impl Fn(&[C64]) -> MatJet + Send + Sync + 'static) -> Result<Self> {
        let inclusion: HoloMatFn = Arc::new(inclusion);
        let center = ambient.domain().center.clone();
        let j0 = inclusion(&center).val;
        let (r, k) = j0.shape();
        if r != ambient.frame_rank() {
            return Err(Error::DimensionMismatch(format!(
                "inclusion has {r} rows, ambient frame rank {}",
                ambient.frame_rank()
            )));
        }
        if k == 0 || k >= r || rank(&j0, 1e-10) < k {
            return Err(Error::InvalidModel(format!("inclusion must have full column rank 0 < k < r, got {k} of {r}")));
        }
        let complement = null_space(&j0.adjoint(), 1e-10);
        let m = ambient.chart_dim();
        let domain = ambient.domain().clone();

        // Holomorphicity and jet consistency at the center.
        for a in 0..m {
            let (d_fd, db_fd) = fd_pair(|w| Ok(inclusion(w).val), &center, a, SEQ_STEP)?;
            let dbar = fro(&db_fd);
            if dbar > HOLO_TOL * (1.0 + fro(&j0)) {
                return Err(Error::NotHolomorphic { residual: dbar });
            }
            let rel = fro(&(&d_fd - &inclusion(&center).d[a])) / (1.0 + fro(&d_fd));
            if rel > 1e-6 {
                return Err(Error::DerivativeMismatch { rel });
            }
        }

        let label = ambient.label().to_string();
        let sub = {
            let amb = ambient.clone();
            let inc = inclusion.clone();
            let eval = {
                let amb = amb.clone();
                let inc = inc.clone();
                move |z: &[C64]| {
                    let j = inc(z).val;
                    j.adjoint() * herm_avg(&amb.source().eval(z)) * j
                }
            };
            let field = if ambient.mode().is_analytic() {
                ChartField::from_source(
                    FnSource::from_jet(m, k, move |z| {
                        let jj = inc(z);
                        let jj = MatJet::holomorphic(jj.val, jj.d);
                        let ge = amb.source().jet(z).expect("analytic ambient");
                        jj.adjoint().mul(&ge).mul(&jj)
                    }),
                    domain.clone(),
                )
                .with_label(format!("{label}/sub"))
                .analytic()?
            } else {
                ChartField::from_source(FnSource::new(m, k, eval), domain.clone()).with_label(format!("{label}/sub"))
            };
            field.with_rank_tol(ambient.rank_tol())
        };
        let quotient = {
            let amb = ambient.clone();
            let inc = inclusion.clone();
            let c = complement.clone();
            ChartField::from_source(
                FnSource::new(m, r - k, move |z| {
                    let q = quotient_map(&inc(z).val, &c);
                    let b = HermitianForm::with_tol(amb.source().eval(z), amb.rank_tol()).expect("square");
                    quotient_form_checked(&q, &b).expect("surjective quotient map").form.gram().clone()
                }),
                domain,
            )
            .with_label(format!("{label}/quot"))
            .with_rank_tol(ambient.rank_tol())
        };
        Ok(Self {
            ambient,
            inclusion,
            complement,
            sub,
            quotient,
        })
    }

    pub fn with_constant_inclusion(ambient: ChartField, j: CMat) -> Result<Self> {
        let m = ambient.chart_dim();
        Self::new(ambient, move |_| MatJet::constant(j.clone(), m))
    }

    pub fn ambient(&self) -> &ChartField {
        &self.ambient
    }

    /// Intrinsic field `G_S = j* G_E j`.
    pub fn sub_field(&self) -> &ChartField {
        &self.sub
    }

    /// Intrinsic field `b_Q` built pointwise from the quotient construction
    /// (finite-difference derivatives).
    pub fn quotient_field(&self) -> &ChartField {
        &self.quotient
    }

    pub fn chart_dim(&self) -> usize {
        self.ambient.chart_dim()
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient.frame_rank()
    }

    pub fn sub_rank(&self) -> usize {
        self.complement.nrows() - self.complement.ncols()
    }

    pub fn quotient_rank(&self) -> usize {
        self.complement.ncols()
    }

    pub fn inclusion(&self, z: &[C64]) -> CMat {
        (self.inclusion)(z).val
    }

    /// `q(z)` with `q j = 0`.
    pub fn quotient_map(&self, z: &[C64]) -> CMat {
        quotient_map(&self.inclusion(z), &self.complement)
    }

    pub fn frames(&self, z: &[C64]) -> Result<SeqFrames> {
        let jet = (self.inclusion)(z);
        let j = jet.val;
        let q = quotient_map(&j, &self.complement);
        let tol = self.ambient.rank_tol();
        let b_e = HermitianForm::with_tol(self.ambient.gram(z)?, tol)?;
        let b_s = HermitianForm::with_tol(j.adjoint() * b_e.gram() * &j, tol)?;
        let b_q = quotient_form_checked(&q, &b_e)?.form;
        let j_dag = adjoint_matrix(&j, &b_s, &b_e)?;
        let q_dag = adjoint_matrix(&q, &b_e, &b_q)?;
        Ok(SeqFrames {
            j,
            dj: jet.d,
            q,
            b_e,
            b_s,
            b_q,
            j_dag,
            q_dag,
        })
    }

    fn ambient_connection(&self, z: &[C64]) -> Result<Vec<CMat>> {
        Ok(chern_connection(&self.ambient, z)?.a)
    }

    /// `σ_α = q (A_E,α j + ∂_α j)` at `z`.
    pub fn sigma(&self, z: &[C64]) -> Result<Vec<CMat>> {
        let jet = (self.inclusion)(z);
        let q = quotient_map(&jet.val, &self.complement);
        let a_e = self.ambient_connection(z)?;
        Ok(a_e.iter().zip(&jet.d).map(|(a, dj)| &q * (a * &jet.val + dj)).collect())
    }

    /// `σ†_β` at `z`, with respect to `b_S` and `b_Q`.
    pub fn sigma_dagger(&self, z: &[C64]) -> Result<Vec<CMat>> {
        let f = self.frames(z)?;
        self.sigma(z)?
            .iter()
            .map(|s| adjoint_matrix(s, &f.b_s, &f.b_q))
            .collect()
    }

    pub fn second_fundamental_form(&self, z: &[C64]) -> Result<SecondFundamentalFormAt> {
        self.sub.constant_rank(z)?;
        self.quotient.constant_rank(z)?;
        let f = self.frames(z)?;
        let sigma = self.sigma(z)?;
        let sigma_dagger = sigma
            .iter()
            .map(|s| adjoint_matrix(s, &f.b_s, &f.b_q))
            .collect::<Result<Vec<_>>>()?;
        let mut dbar_residual: f64 = 0.0;
        for a in 0..self.chart_dim() {
            let (_, db) = fd_pair(|w| Ok(self.inclusion(w)), z, a, SEQ_STEP)?;
            dbar_residual = dbar_residual.max(fro(&(&f.q * db)));
        }
        let kernel = null_space(f.b_s.gram(), f.b_s.rank_tol());
        let kernel_residual = sigma
            .iter()
            .map(|s| fro(&(f.b_q.gram() * s * &kernel)))
            .fold(0.0, f64::max);
        Ok(SecondFundamentalFormAt {
            point: z.to_vec(),
            sigma,
            sigma_dagger,
            dbar_residual,
            kernel_residual,
        })
    }

    /// `C∞`-linearity of `σ`: for the section `s(w) = φ(w) s₀` with a
    /// non-holomorphic `φ`, compares `q (D_E (j s))` (differentiating `j s`
    /// by central differences) with `φ(z) σ s₀`, after contraction with `G_Q`.
    pub fn sigma_linearity_residual<R: Rng>(&self, rng: &mut R, z: &[C64]) -> Result<f64> {
        let k = self.sub_rank();
        let m = self.chart_dim();
        let s0 = random_cmat(rng, k, 1, 1.0);
        let c0 = random_cmat(rng, 1, 1, 1.0)[(0, 0)];
        let ch = random_cmat(rng, 1, m, 1.0);
        let ca = random_cmat(rng, 1, m, 1.0);
        let phi = |w: &[C64]| -> C64 {
            (0..m).fold(c0, |acc, a| {
                let dz = w[a] - z[a];
                acc + ch[(0, a)] * dz + ca[(0, a)] * dz.conj() + ch[(0, a)] * ca[(0, a)] * dz * dz.conj()
            })
        };
        let f = self.frames(z)?;
        let a_e = self.ambient_connection(z)?;
        let sigma = self.sigma(z)?;
        let js = |w: &[C64]| Ok(self.inclusion(w) * &s0 * phi(w));
        let js0 = js(z)?;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            let (d, _) = fd_pair(js, z, a, SEQ_STEP)?;
            let lhs = &f.q * (&a_e[a] * &js0 + d);
            let rhs = &sigma[a] * &s0 * phi(z);
            worst = worst.max(fro(&(f.b_q.gram() * (lhs - rhs))));
        }
        Ok(worst)
    }

    /// Right-hand side of the sub-bundle curvature equation:
    /// `R_S,αβ = j* R_E,αβ j - σ_β* G_Q σ_α`.
    pub fn codazzi_sub_tensor(&self, z: &[C64]) -> Result<CurvatureAt> {
        let f = self.frames(z)?;
        let re = curvature_tensor(&self.ambient, z)?;
        let sigma = self.sigma(z)?;
        let gq = f.b_q.gram();
        let m = self.chart_dim();
        let blocks = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| f.j.adjoint() * &re.blocks[a][b] * &f.j - sigma[b].adjoint() * gq * &sigma[a])
                    .collect()
            })
            .collect();
        Ok(CurvatureAt::new(z.to_vec(), blocks, f.b_s.gram().clone()))
    }

    /// Right-hand side of the quotient curvature equation:
    /// `R_Q,αβ = q†* R_E,αβ q† + σ†_α* G_S σ†_β`.
    pub fn codazzi_quot_tensor(&self, z: &[C64]) -> Result<CurvatureAt> {
        let f = self.frames(z)?;
        let re = curvature_tensor(&self.ambient, z)?;
        let sd = self.sigma_dagger(z)?;
        let gs = f.b_s.gram();
        let m = self.chart_dim();
        let blocks = (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| f.q_dag.adjoint() * &re.blocks[a][b] * &f.q_dag + sd[a].adjoint() * gs * &sd[b])
                    .collect()
            })
            .collect();
        Ok(CurvatureAt::new(z.to_vec(), blocks, f.b_q.gram().clone()))
    }

    /// `R_S(∂_α, ∂̄_β, s, t̄)` from the sub-bundle equation.
    pub fn codazzi_sub(&self, z: &[C64], alpha: usize, beta: usize, s: &[C64], t: &[C64]) -> Result<C64> {
        Ok(contract(&self.codazzi_sub_tensor(z)?.blocks[alpha][beta], s, t))
    }

    /// `R_Q(∂_α, ∂̄_β, s, t̄)` from the quotient equation.
    pub fn codazzi_quot(&self, z: &[C64], alpha: usize, beta: usize, s: &[C64], t: &[C64]) -> Result<C64> {
        Ok(contract(&self.codazzi_quot_tensor(z)?.blocks[alpha][beta], s, t))
    }

    /// Both curvature equations against the intrinsic curvature of `b_S` and `b_Q`.
    pub fn codazzi_check(&self, z: &[C64]) -> Result<CodazziReport> {
        let sub_formula = self.codazzi_sub_tensor(z)?;
        let sub_direct = curvature_tensor(&self.sub, z)?;
        let quot_formula = self.codazzi_quot_tensor(z)?;
        let quot_direct = curvature_tensor(&self.quotient, z)?;
        Ok(CodazziReport {
            sub_residual: sub_formula.relative_distance(&sub_direct),
            quot_residual: quot_formula.relative_distance(&quot_direct),
            sub_monotone_gap: monotone_gap(&sub_formula, &self.frames(z)?, &curvature_tensor(&self.ambient, z)?, true),
            quot_monotone_gap: monotone_gap(
                &quot_formula,
                &self.frames(z)?,
                &curvature_tensor(&self.ambient, z)?,
                false,
            ),
        })
    }

    fn a_sub(&self, z: &[C64]) -> Result<Vec<CMat>> {
        Ok(chern_connection(&self.sub, z)?.a)
    }

    fn a_quot(&self, z: &[C64]) -> Result<Vec<CMat>> {
        Ok(chern_connection(&self.quotient, z)?.a)
    }

    /// Residuals of the five lines of the sequence identity table.
    pub fn demailly_residuals(&self, z: &[C64]) -> Result<DemaillyReport> {
        self.sub.constant_rank(z)?;
        self.quotient.constant_rank(z)?;
        let m = self.chart_dim();
        let f = self.frames(z)?;
        let (ge, gs, gq) = (f.b_e.gram(), f.b_s.gram(), f.b_q.gram());
        let a_e = self.ambient_connection(z)?;
        let a_s = self.a_sub(z)?;
        let a_q = self.a_quot(z)?;
        let sigma = self.sigma(z)?;
        let sd = self.sigma_dagger(z)?;
        let h = SEQ_STEP;

        let mut lines = [0.0f64; 5];
        let mut bump = |i: usize, x: f64| lines[i] = lines[i].max(x);

        let jd = |w: &[C64]| Ok(self.frames(w)?.j_dag);
        let qd = |w: &[C64]| Ok(self.frames(w)?.q_dag);
        let qm = |w: &[C64]| Ok(self.quotient_map(w));
        for a in 0..m {
            // D'j ∼ q†σ
            let dj = &a_e[a] * &f.j + &f.dj[a] - &f.j * &a_s[a];
            bump(0, fro(&(ge * (dj - &f.q_dag * &sigma[a]))));

            // D'q ∼ -σ j†
            let (dq, _) = fd_pair(qm, z, a, h)?;
            let dq = &a_q[a] * &f.q + dq - &f.q * &a_e[a];
            bump(1, fro(&(gq * (dq + &sigma[a] * &f.j_dag))));

            // D'j† ∼ 0, ∂̄j† ∼ σ†q
            let (djd, dbjd) = fd_pair(jd, z, a, h)?;
            let djd = &a_s[a] * &f.j_dag + djd - &f.j_dag * &a_e[a];
            bump(2, fro(&(gs * djd)));
            bump(2, fro(&(gs * (dbjd - &sd[a] * &f.q))));

            // D'q† ∼ 0, ∂̄q† ∼ -jσ†
            let (dqd, dbqd) = fd_pair(qd, z, a, h)?;
            let dqd = &a_e[a] * &f.q_dag + dqd - &f.q_dag * &a_q[a];
            bump(3, fro(&(ge * dqd)));
            bump(3, fro(&(ge * (dbqd + &f.j * &sd[a]))));
        }

        // D'σ ∼ 0 and ∂̄σ† ∼ 0 as 2-forms.
        let mut d_sigma = Vec::with_capacity(m);
        let mut db_sigma_dag = Vec::with_capacity(m);
        for a in 0..m {
            let ds = crate::chart_calc::fd_d_list(|w| self.sigma(w), z, a, h)?;
            let dbsd = crate::chart_calc::fd_dbar_list(|w| self.sigma_dagger(w), z, a, h)?;
            d_sigma.push(ds);
            db_sigma_dag.push(dbsd);
        }
        for a in 0..m {
            for b in 0..m {
                let dab = &a_q[a] * &sigma[b] + &d_sigma[a][b] - &sigma[b] * &a_s[a];
                let dba = &a_q[b] * &sigma[a] + &d_sigma[b][a] - &sigma[a] * &a_s[b];
                bump(4, fro(&(gq * (dab - dba))));
                bump(4, fro(&(gs * (&db_sigma_dag[a][b] - &db_sigma_dag[b][a]))));
            }
        }
        Ok(DemaillyReport { lines })
    }

    /// Curvature operator in the smooth splitting `s ↦ (j†s, q s)`:
    /// `[[Θ_S + σ†_β σ_α, -D'_α σ†_β], [-∂̄_β σ_α, Θ_Q - σ_α σ†_β]]`,
    /// with `Θ = G⁺R` computed intrinsically for `S` and `Q`.
    pub fn splitting_curvature_blocks(&self, z: &[C64]) -> Result<SplittingBlocks> {
        self.sub.constant_rank(z)?;
        self.quotient.constant_rank(z)?;
        let m = self.chart_dim();
        let f = self.frames(z)?;
        let tol = self.ambient.rank_tol();
        let re = curvature_tensor(&self.ambient, z)?;
        let rs = curvature_tensor(&self.sub, z)?;
        let rq = curvature_tensor(&self.quotient, z)?;
        let gs_p = pinv(f.b_s.gram(), tol);
        let gq_p = pinv(f.b_q.gram(), tol);
        let a_s = self.a_sub(z)?;
        let a_q = self.a_quot(z)?;
        let sigma = self.sigma(z)?;
        let sd = self.sigma_dagger(z)?;
        let h = SEQ_STEP;
        let mut d_sd = Vec::with_capacity(m);
        let mut db_sigma = Vec::with_capacity(m);
        for a in 0..m {
            d_sd.push(crate::chart_calc::fd_d_list(|w| self.sigma_dagger(w), z, a, h)?);
            db_sigma.push(crate::chart_calc::fd_dbar_list(|w| self.sigma(w), z, a, h)?);
        }
        let back = hstack(&f.j, &f.q_dag);
        let fwd = crate::linalg::vstack(&f.j_dag, &f.q);
        let mut blocks = vec![vec![SplitBlock::default(); m]; m];
        let mut reassembly: f64 = 0.0;
        let mut off_diag: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let ss = &gs_p * &rs.blocks[a][b] + &sd[b] * &sigma[a];
                let qq = &gq_p * &rq.blocks[a][b] - &sigma[a] * &sd[b];
                let sq = -(&a_s[a] * &sd[b] + &d_sd[a][b] - &sd[b] * &a_q[a]);
                let qs = -db_sigma[b][a].clone();
                let top = hstack(&ss, &sq);
                let bottom = hstack(&qs, &qq);
                let op = crate::linalg::vstack(&top, &bottom);
                let theta = &back * op * &fwd;
                let scale = 1.0 + fro(&re.blocks[a][b]);
                reassembly = reassembly.max(fro(&(f.b_e.gram() * theta - &re.blocks[a][b])) / scale);
                off_diag = off_diag.max(fro(&sq).max(fro(&qs)));
                blocks[a][b] = SplitBlock { ss, sq, qs, qq };
            }
        }
        Ok(SplittingBlocks {
            blocks,
            reassembly_residual: reassembly,
            off_diagonal_norm: off_diag,
        })
    }
}

fn quotient_map(j: &CMat, complement: &CMat) -> CMat {
    let (r, k) = j.shape();
    let m = inv(&hstack(j, complement));
    m.rows(k, r - k).into_owned()
}

fn contract(block: &CMat, s: &[C64], t: &[C64]) -> C64 {
    let sv = CMat::from_column_slice(s.len(), 1, s);
    let tv = CMat::from_column_slice(t.len(), 1, t);
    (tv.adjoint() * block * sv)[(0, 0)]
}

/// Largest violation of `R_S ≤ j*R_E j` (sub) or `R_Q ≥ q†*R_E q†` (quotient)
/// over the diagonal directions `α = β` and random section values; `≤ 0` means
/// the inequality holds.
fn monotone_gap(formula: &CurvatureAt, f: &SeqFrames, re: &CurvatureAt, sub: bool) -> f64 {
    let m = formula.chart_dim();
    let n = formula.frame_rank();
    let mut rng = sample_rng(0x5eed, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..8 {
        let v = random_cmat(&mut rng, m, 1, 1.0);
        let s = random_cmat(&mut rng, n, 1, 1.0);
        let (emb, sign) = if sub { (&f.j, 1.0) } else { (&f.q_dag, -1.0) };
        let lhs: C64 = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| v[a] * v[b].conj() * (s.adjoint() * &formula.blocks[a][b] * &s)[(0, 0)])
            .sum();
        let es = emb * &s;
        let rhs: C64 = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| v[a] * v[b].conj() * (es.adjoint() * &re.blocks[a][b] * &es)[(0, 0)])
            .sum();
        worst = worst.max(sign * (lhs.re - rhs.re));
    }
    worst
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CodazziReport {
    pub sub_residual: f64,
    pub quot_residual: f64,
    /// `max (R_S - j*R_E j)(v, v̄, s, s̄)`; nonpositive when the sub inequality holds.
    pub sub_monotone_gap: f64,
    /// `max (q†*R_E q† - R_Q)(v, v̄, s, s̄)`; nonpositive when the quotient inequality holds.
    pub quot_monotone_gap: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DemaillyReport {
    /// Contracted residuals of: `D'j ∼ q†σ`; `D'q ∼ -σj†`;
    /// `D'j† ∼ 0, ∂̄j† ∼ σ†q`; `D'q† ∼ 0, ∂̄q† ∼ -jσ†`; `D'σ ∼ 0, ∂̄σ† ∼ 0`.
    pub lines: [f64; 5],
}

impl DemaillyReport {
    pub const NAMES: [&'static str; 5] = [
        "D'j ~ q^dag sigma",
        "D'q ~ -sigma j^dag",
        "D'j^dag ~ 0, dbar j^dag ~ sigma^dag q",
        "D'q^dag ~ 0, dbar q^dag ~ -j sigma^dag",
        "D'sigma ~ 0, dbar sigma^dag ~ 0",
    ];

    pub fn max(&self) -> f64 {
        self.lines.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SplitBlock {
    pub ss: CMat,
    pub sq: CMat,
    pub qs: CMat,
    pub qq: CMat,
}

#[derive(Debug, Clone)]
pub struct SplittingBlocks {
    /// `blocks[α][β]`
    pub blocks: Vec<Vec<SplitBlock>>,
    /// `max |G_E [j q†] B [j†; q] - R_E| / (1 + |R_E|)`
    pub reassembly_residual: f64,
    pub off_diagonal_norm: f64,
}

/// Field `z ↦ G₁(z) + G₂(z)`; analytic when both summands are.
pub fn sum_field(b1: &ChartField, b2: &ChartField) -> Result<ChartField> {
    weighted_sum_field(&[(1.0, b1), (1.0, b2)])
}

pub fn weighted_sum_field(parts: &[(f64, &ChartField)]) -> Result<ChartField> {
    let first = parts[0].1;
    if parts
        .iter()
        .any(|(_, f)| f.chart_dim() != first.chart_dim() || f.frame_rank() != first.frame_rank())
    {
        return Err(Error::DimensionMismatch("summands differ in shape".into()));
    }
    let src = SumSource::new(parts.iter().map(|(c, f)| (*c, f.source().clone())).collect());
    let label = parts
        .iter()
        .map(|(c, f)| format!("{c}*{}", f.label()))
        .collect::<Vec<_>>()
        .join("+");
    let field = ChartField::from_source(src, first.domain().clone())
        .with_label(label)
        .with_rank_tol(first.rank_tol());
    if parts.iter().all(|(_, f)| f.mode().is_analytic()) {
        field.analytic_unchecked()
    } else {
        Ok(field)
    }
}

/// Curvature of `h = b₁ + b₂` assembled as `R₁ + R₂ - σ_β* q σ_α` with
/// `σ_α = A₁,α - A₂,α` and `q` the sum quotient form.
#[derive(Debug, Clone)]
pub struct SumCurvature {
    pub curvature: CurvatureAt,
    pub sigma: Vec<CMat>,
    pub q: CMat,
}

pub fn sum_curvature(b1: &ChartField, b2: &ChartField, z: &[C64]) -> Result<SumCurvature> {
    let g1 = b1.gram(z)?;
    let g2 = b2.gram(z)?;
    let h = &g1 + &g2;
    let ratio = pd_ratio(&h);
    if ratio <= b1.rank_tol() {
        return Err(Error::NotPositive { ratio });
    }
    let c1 = chern_connection(b1, z)?;
    let c2 = chern_connection(b2, z)?;
    let r1 = curvature_tensor(b1, z)?;
    let r2 = curvature_tensor(b2, z)?;
    let q = crate::herm_core::sum_quotient_gram(&g1, &g2, b1.rank_tol())?;
    let sigma: Vec<CMat> = c1.a.iter().zip(&c2.a).map(|(x, y)| x - y).collect();
    let m = b1.chart_dim();
    let blocks = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| &r1.blocks[a][b] + &r2.blocks[a][b] - sigma[b].adjoint() * &q * &sigma[a])
                .collect()
        })
        .collect();
    Ok(SumCurvature {
        curvature: CurvatureAt::new(z.to_vec(), blocks, h),
        sigma,
        q,
    })
}

/// Relative distance between the assembled sum curvature and the direct
/// curvature of `b₁ + b₂`.
pub fn sum_check(b1: &ChartField, b2: &ChartField, z: &[C64]) -> Result<f64> {
    let formula = sum_curvature(b1, b2, z)?;
    let direct = curvature_tensor(&sum_field(b1, b2)?, z)?;
    Ok(formula.curvature.relative_distance(&direct))
}

/// Change of the `σ_β* q σ_α` term when `A₁` and `A₂` are shifted by
/// kernel-valued perturbations, relative to the term's size.
pub fn sum_term_gauge_residual(
    b1: &ChartField,
    b2: &ChartField,
    z: &[C64],
    k1: &KernelPerturbation,
    k2: &KernelPerturbation,
) -> Result<f64> {
    let base = sum_curvature(b1, b2, z)?;
    let p1 = k1.eval(b1, z);
    let p2 = k2.eval(b2, z);
    let m = b1.chart_dim();
    let mut worst: f64 = 0.0;
    let shifted: Vec<CMat> = (0..m).map(|a| &base.sigma[a] + &p1[a] - &p2[a]).collect();
    for a in 0..m {
        for b in 0..m {
            let t0 = base.sigma[b].adjoint() * &base.q * &base.sigma[a];
            let t1 = shifted[b].adjoint() * &base.q * &shifted[a];
            worst = worst.max(fro(&(&t1 - &t0)) / (1.0 + fro(&t0)));
        }
    }
    Ok(worst)
}

/// Positive-definite analytic field `G = I + P(z)* P(z)` with `P` affine in `z`.
pub fn random_positive_field<R: Rng>(rng: &mut R, m: usize, r: usize, domain: Domain) -> Result<ChartField> {
    let p0 = random_cmat(rng, r, r, 0.5);
    let pa: Vec<CMat> = (0..m).map(|_| random_cmat(rng, r, r, 0.5)).collect();
    let center = domain.center.clone();
    ChartField::from_source(
        FnSource::from_jet(m, r, move |z| {
            let val = pa.iter().enumerate().fold(p0.clone(), |acc, (a, pa)| acc + pa * (z[a] - center[a]));
            let p = MatJet::holomorphic(val, pa.clone());
            MatJet::constant(eye(r), z.len()).add(&p.adjoint().mul(&p))
        }),
        domain,
    )
    .with_label(format!("rand-pd-{r}"))
    .analytic_unchecked()
}

/// Degenerate analytic field `G = F(z)* M F(z)` of constant rank `rank`, with
/// `F` holomorphic affine `rank×r` and `M = I + N*N`.
pub fn random_degenerate_field<R: Rng>(
    rng: &mut R,
    m: usize,
    r: usize,
    rank_: usize,
    domain: Domain,
) -> Result<ChartField> {
    let f0 = hstack(&eye(rank_), &zeros(rank_, r - rank_)) + random_cmat(rng, rank_, r, 0.3);
    let fa: Vec<CMat> = (0..m).map(|_| random_cmat(rng, rank_, r, 0.3)).collect();
    let nmat = random_cmat(rng, rank_, rank_, 0.5);
    let mm = eye(rank_) + nmat.adjoint() * &nmat;
    let center = domain.center.clone();
    ChartField::from_source(
        FnSource::from_jet(m, r, move |z| {
            let val = fa.iter().enumerate().fold(f0.clone(), |acc, (a, fa)| acc + fa * (z[a] - center[a]));
            let f = MatJet::holomorphic(val, fa.clone());
            let mj = MatJet::constant(mm.clone(), z.len());
            f.adjoint().mul(&mj).mul(&f)
        }),
        domain,
    )
    .with_label(format!("rand-deg-{rank_}/{r}"))
    .analytic_unchecked()
}

/// Affine holomorphic inclusion `j(z) = J₀ + Σ z_α J_α` with `J₀` close to `[I; 0]`.
pub fn random_inclusion<R: Rng>(
    rng: &mut R,
    m: usize,
    r: usize,
    k: usize,
    center: Vec<C64>,
) -> impl Fn(&[C64]) -> MatJet + Send + Sync + 'static {
    let j0 = crate::linalg::vstack(&eye(k), &zeros(r - k, k)) + random_cmat(rng, r, k, 0.3);
    let ja: Vec<CMat> = (0..m).map(|_| random_cmat(rng, r, k, 0.4)).collect();
    move |z: &[C64]| {
        let val = ja.iter().enumerate().fold(j0.clone(), |acc, (a, ja)| acc + ja * (z[a] - center[a]));
        MatJet::holomorphic(val, ja.clone())
    }
}

/// Radius of the random-instance charts.
pub const INSTANCE_RADIUS: f64 = 0.5;
/// Radius of the evaluation region inside random-instance charts.
pub const INSTANCE_REGION: f64 = 0.2;

/// Seeded random sequence with `m ≤ 2`, `r ≤ 4`, `k ≤ 2`; instance `i` of `seed`.
pub fn random_sequence(seed: u64, i: u64) -> Result<ExactSeqChart> {
    let mut rng = sample_rng(seed, i);
    let m = 1 + (i % 2) as usize;
    let r = 2 + (i % 3) as usize;
    let k = 1 + ((i / 3) as usize % (r - 1).min(2));
    let domain = Domain::origin(m, INSTANCE_RADIUS);
    let ambient = random_positive_field(&mut rng, m, r, domain.clone())?;
    let j = random_inclusion(&mut rng, m, r, k, domain.center.clone());
    ExactSeqChart::new(ambient, j)
}

/// `O(-1) ⊂ C²` over the standard chart of the projective line:
/// `j(z) = (1, z)ᵀ`, `G_E = I`.
pub fn tautological_line() -> Result<ExactSeqChart> {
    let ambient = ChartField::from_source(
        crate::chart_calc::fields::ConstantSource::new(eye(2), 1),
        Domain::origin(1, 1.0),
    )
    .with_label("C2")
    .analytic()?;
    ExactSeqChart::new(ambient, |z| {
        MatJet::holomorphic(CMat::from_column_slice(2, 1, &[cr(1.0), z[0]]), vec![CMat::from_column_slice(2, 1, &[cr(0.0), cr(1.0)])])
    })
}
