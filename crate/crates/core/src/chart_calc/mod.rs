//! Pointwise differential geometry of Hermitian form fields on a polydisc chart.
//!
//! A [`ChartField`] is a Gram-matrix valued function `z -> G(z)` in a fixed
//! holomorphic frame. Derivatives come either from central differences or
//! from an analytic [`MatJet`] supplied by the field's source.

mod connection;
mod curvature;
pub mod fields;
mod geometry;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::MatJet;
use crate::linalg::{c, cr, fro, herm_avg, rank, CMat, C64, DEFAULT_RANK_TOL};
use crate::sampling;

pub use connection::{chern_connection, ConnectionAt};
pub use curvature::{
    curvature_from_connection, curvature_tensor, gauge_independence_residual, CurvatureAt,
    KernelPerturbation,
};
pub use geometry::{
    fd_convergence_ratio, holomorphic_curvature_defect, hsc, hsc_from_curvature,
    pullback_consistency, torsion_defect, Torsion,
};
pub use fields::HoloMap;

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Outer step for nested second differences.
pub const DEFAULT_OUTER_STEP: f64 = 1e-3;
/// Default bound on the connection compatibility residual.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-7;
/// Relative tolerance of the analytic-vs-difference self-check.
pub const SELF_CHECK_TOL: f64 = 1e-6;

/// A Gram-matrix field in a fixed frame.
pub trait FormSource: Send + Sync {
    fn chart_dim(&self) -> usize;
    fn frame_rank(&self) -> usize;
    fn eval(&self, z: &[C64]) -> CMat;
    /// Analytic jet, when the source has one.
    fn jet(&self, _z: &[C64]) -> Option<MatJet> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DerivativeMode {
    FiniteDifference { step: f64, outer_step: f64 },
    Analytic,
}

impl DerivativeMode {
    pub fn fd() -> Self {
        DerivativeMode::FiniteDifference {
            step: DEFAULT_STEP,
            outer_step: DEFAULT_OUTER_STEP,
        }
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, DerivativeMode::Analytic)
    }
}

/// Closed polydisc `{ z : |z_i - center_i| <= radius }`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    #[serde(with = "crate::json::cvec")]
    pub center: Vec<C64>,
    pub radius: f64,
}

impl Domain {
    pub fn new(center: Vec<C64>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn origin(m: usize, radius: f64) -> Self {
        Self::new(vec![cr(0.0); m], radius)
    }

    /// Checks that every point within `reach` of `z` (per coordinate) is inside.
    pub fn check(&self, z: &[C64], reach: f64) -> Result<()> {
        if z.len() != self.center.len() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, chart has {}",
                z.len(),
                self.center.len()
            )));
        }
        for (coord, (zi, ci)) in z.iter().zip(&self.center).enumerate() {
            let distance = (zi - ci).norm() + reach;
            if distance > self.radius {
                return Err(Error::OutOfDomain {
                    coord,
                    distance,
                    radius: self.radius,
                });
            }
        }
        Ok(())
    }
}

/// A smooth Gram field on a polydisc chart together with its derivative mode.
#[derive(Clone)]
pub struct ChartField {
    source: Arc<dyn FormSource>,
    mode: DerivativeMode,
    domain: Domain,
    rank_tol: f64,
    solver_tol: f64,
    label: String,
}

impl fmt::Debug for ChartField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartField")
            .field("label", &self.label)
            .field("chart_dim", &self.chart_dim())
            .field("rank", &self.frame_rank())
            .field("mode", &self.mode)
            .field("domain", &self.domain)
            .finish()
    }
}

impl ChartField {
    /// Finite-difference field with default steps.
    pub fn new(source: Arc<dyn FormSource>, domain: Domain) -> Self {
        Self {
            source,
            mode: DerivativeMode::fd(),
            domain,
            rank_tol: DEFAULT_RANK_TOL,
            solver_tol: DEFAULT_SOLVER_TOL,
            label: String::new(),
        }
    }

    pub fn from_source<S: FormSource + 'static>(source: S, domain: Domain) -> Self {
        Self::new(Arc::new(source), domain)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_fd(mut self, step: f64, outer_step: f64) -> Self {
        self.mode = DerivativeMode::FiniteDifference { step, outer_step };
        self
    }

    pub fn with_solver_tol(mut self, tol: f64) -> Self {
        self.solver_tol = tol;
        self
    }

    pub fn with_rank_tol(mut self, tol: f64) -> Self {
        self.rank_tol = tol;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    /// Switches to analytic derivatives after comparing them with central
    /// differences at 10 seeded points of the inner half of the domain.
    pub fn analytic(self) -> Result<Self> {
        let field = self.analytic_unchecked()?;
        let rel = field.analytic_self_check(10)?;
        if rel > SELF_CHECK_TOL {
            return Err(Error::DerivativeMismatch { rel });
        }
        Ok(field)
    }

    pub fn analytic_unchecked(mut self) -> Result<Self> {
        if self.source.jet(&self.domain.center).is_none() {
            return Err(Error::InvalidModel(format!(
                "field `{}` has no analytic derivatives",
                self.label
            )));
        }
        self.mode = DerivativeMode::Analytic;
        Ok(self)
    }

    /// Worst relative disagreement `|Δ| / (1 + |∂G|)` over `points` samples.
    pub fn analytic_self_check(&self, points: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..points {
            let mut rng = sampling::sample_rng(0x5e1f_c4ec, i as u64);
            let z = sampling::polydisc_point(&mut rng, &self.domain.center, 0.5 * self.domain.radius);
            let jet = self.jet_unchecked(&z)?;
            for a in 0..self.chart_dim() {
                let (d, db) = fd_pair(|w| Ok(self.source.eval(w)), &z, a, DEFAULT_STEP)?;
                let e1 = fro(&(&d - &jet.d[a])) / (1.0 + fro(&jet.d[a]));
                let e2 = fro(&(&db - &jet.db[a])) / (1.0 + fro(&jet.db[a]));
                worst = worst.max(e1).max(e2);
            }
        }
        Ok(worst)
    }

    pub fn source(&self) -> &Arc<dyn FormSource> {
        &self.source
    }

    pub fn chart_dim(&self) -> usize {
        self.source.chart_dim()
    }

    pub fn frame_rank(&self) -> usize {
        self.source.frame_rank()
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn solver_tol(&self) -> f64 {
        self.solver_tol
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Distance the stencil of a curvature evaluation reaches from `z`.
    pub fn stencil_reach(&self) -> f64 {
        match self.mode {
            DerivativeMode::FiniteDifference { step, outer_step } => step + outer_step,
            DerivativeMode::Analytic => DEFAULT_OUTER_STEP,
        }
    }

    /// `G(z)`, Hermitian-averaged.
    pub fn gram(&self, z: &[C64]) -> Result<CMat> {
        self.domain.check(z, 0.0)?;
        Ok(herm_avg(&self.source.eval(z)))
    }

    pub(crate) fn gram_unchecked(&self, z: &[C64]) -> CMat {
        herm_avg(&self.source.eval(z))
    }

    fn jet_unchecked(&self, z: &[C64]) -> Result<MatJet> {
        self.source
            .jet(z)
            .ok_or_else(|| Error::InvalidModel(format!("field `{}` has no analytic derivatives", self.label)))
    }

    /// Analytic jet at `z` (analytic mode only).
    pub fn jet(&self, z: &[C64]) -> Result<MatJet> {
        self.domain.check(z, 0.0)?;
        self.jet_unchecked(z)
    }

    /// `∂_α G` (or `∂̄_α G` when `conjugate`).
    pub fn wirtinger(&self, z: &[C64], alpha: usize, conjugate: bool) -> Result<CMat> {
        let (d, db) = self.first_derivatives(z)?;
        Ok(if conjugate { db[alpha].clone() } else { d[alpha].clone() })
    }

    /// All `∂_α G` and `∂̄_α G` at `z`.
    pub fn first_derivatives(&self, z: &[C64]) -> Result<(Vec<CMat>, Vec<CMat>)> {
        match self.mode {
            DerivativeMode::Analytic => {
                let j = self.jet(z)?;
                Ok((j.d, j.db))
            }
            DerivativeMode::FiniteDifference { step, .. } => {
                self.domain.check(z, step)?;
                let mut d = Vec::new();
                let mut db = Vec::new();
                for a in 0..self.chart_dim() {
                    let (x, y) = fd_pair(|w| Ok(self.gram_unchecked(w)), z, a, step)?;
                    d.push(x);
                    db.push(y);
                }
                Ok((d, db))
            }
        }
    }

    /// Rank of `G` at `z`, checked against the rank at the stencil neighbours.
    pub fn constant_rank(&self, z: &[C64]) -> Result<usize> {
        let reach = self.stencil_reach();
        self.domain.check(z, reach)?;
        let center = rank(&self.gram_unchecked(z), self.rank_tol);
        for a in 0..self.chart_dim() {
            for dz in [cr(reach), cr(-reach), c(0.0, reach), c(0.0, -reach)] {
                let w = shifted(z, a, dz);
                let neighbor = rank(&self.gram_unchecked(&w), self.rank_tol);
                if neighbor != center {
                    return Err(Error::RankJump { center, neighbor });
                }
            }
        }
        Ok(center)
    }
}

pub(crate) fn shifted(z: &[C64], a: usize, dz: C64) -> Vec<C64> {
    let mut w = z.to_vec();
    w[a] += dz;
    w
}

/// Central-difference Wirtinger pair `(∂_α F, ∂̄_α F)` with step `h`.
pub fn fd_pair<F>(f: F, z: &[C64], a: usize, h: f64) -> Result<(CMat, CMat)>
where
    F: Fn(&[C64]) -> Result<CMat>,
{
    let xp = f(&shifted(z, a, cr(h)))?;
    let xm = f(&shifted(z, a, cr(-h)))?;
    let yp = f(&shifted(z, a, c(0.0, h)))?;
    let ym = f(&shifted(z, a, c(0.0, -h)))?;
    let dx = (xp - xm) / cr(2.0 * h);
    let dy = (yp - ym) / cr(2.0 * h);
    let iy = &dy * c(0.0, 1.0);
    Ok(((&dx - &iy) * cr(0.5), (&dx + &iy) * cr(0.5)))
}

/// Central-difference `∂̄_β` of a list-valued function.
pub(crate) fn fd_dbar_list<F>(f: F, z: &[C64], b: usize, h: f64) -> Result<Vec<CMat>>
where
    F: Fn(&[C64]) -> Result<Vec<CMat>>,
{
    let xp = f(&shifted(z, b, cr(h)))?;
    let xm = f(&shifted(z, b, cr(-h)))?;
    let yp = f(&shifted(z, b, c(0.0, h)))?;
    let ym = f(&shifted(z, b, c(0.0, -h)))?;
    Ok((0..xp.len())
        .map(|i| {
            let dx = (&xp[i] - &xm[i]) / cr(2.0 * h);
            let dy = (&yp[i] - &ym[i]) / cr(2.0 * h);
            (dx + dy * c(0.0, 1.0)) * cr(0.5)
        })
        .collect())
}

/// Central-difference `∂_β` of a list-valued function.
pub(crate) fn fd_d_list<F>(f: F, z: &[C64], b: usize, h: f64) -> Result<Vec<CMat>>
where
    F: Fn(&[C64]) -> Result<Vec<CMat>>,
{
    let xp = f(&shifted(z, b, cr(h)))?;
    let xm = f(&shifted(z, b, cr(-h)))?;
    let yp = f(&shifted(z, b, c(0.0, h)))?;
    let ym = f(&shifted(z, b, c(0.0, -h)))?;
    Ok((0..xp.len())
        .map(|i| {
            let dx = (&xp[i] - &xm[i]) / cr(2.0 * h);
            let dy = (&yp[i] - &ym[i]) / cr(2.0 * h);
            (dx - dy * c(0.0, 1.0)) * cr(0.5)
        })
        .collect())
}
