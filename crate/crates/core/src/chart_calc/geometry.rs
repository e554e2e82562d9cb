use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{fro, herm_avg, pd_ratio, zeros, CMat, CVec, C64};

use super::connection::{chern_connection, raw_connection, solve_connection};
use super::curvature::{curvature_tensor, CurvatureAt};
use super::fields::{HoloMap, PullbackSource};
use super::{fd_d_list, fd_pair, ChartField, DerivativeMode, Domain, DEFAULT_STEP};

fn require_tangent(r: usize, m: usize) -> Result<()> {
    if r != m {
        return Err(Error::DimensionMismatch(format!(
            "tangent field expected (frame rank {r} vs chart dimension {m})"
        )));
    }
    Ok(())
}

/// `H(v) = R(v, v̄, v, v̄) / b(v, v̄)²` from a precomputed tensor.
pub fn hsc_from_curvature(curv: &CurvatureAt, v: &[C64]) -> Result<f64> {
    let m = curv.chart_dim();
    require_tangent(curv.frame_rank(), m)?;
    if v.len() != m {
        return Err(Error::DimensionMismatch(format!("direction has {} entries, chart has {m}", v.len())));
    }
    let g = curv.form_at_point.gram();
    if pd_ratio(g) <= curv.form_at_point.rank_tol() {
        return Err(Error::NotPositiveAtPoint);
    }
    let vv = CVec::from_column_slice(v);
    let vnorm2 = vv.norm_squared();
    let b = (vv.adjoint() * g * &vv)[(0, 0)].re;
    if vnorm2 == 0.0 || b <= 1e-14 * vnorm2 * fro(g) {
        return Err(Error::ZeroVector);
    }
    Ok(curv.bisectional(v, v).re / (b * b))
}

pub fn hsc(field: &ChartField, z: &[C64], v: &[C64]) -> Result<f64> {
    require_tangent(field.frame_rank(), field.chart_dim())?;
    hsc_from_curvature(&curvature_tensor(field, z)?, v)
}

/// Torsion defect, computed from `∂G` and cross-checked through the connection.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Torsion {
    /// `max_{α<β, γ} |∂_α G[γ][β] - ∂_β G[γ][α]|`
    pub defect: f64,
    /// `max_{α<β, γ} |b(A_α e_β - A_β e_α, ē_γ)|`
    pub via_connection: f64,
}

pub fn torsion_defect(field: &ChartField, z: &[C64]) -> Result<Torsion> {
    let m = field.chart_dim();
    require_tangent(field.frame_rank(), m)?;
    let conn = chern_connection(field, z)?;
    let (d, g, a) = (&conn.d_gram, &conn.gram, &conn.a);
    let mut defect: f64 = 0.0;
    let mut via: f64 = 0.0;
    for al in 0..m {
        for be in al + 1..m {
            let tau = a[al].column(be) - a[be].column(al);
            let gt = g * tau;
            for ga in 0..m {
                defect = defect.max((d[al][(ga, be)] - d[be][(ga, al)]).norm());
                via = via.max(gt[ga].norm());
            }
        }
    }
    Ok(Torsion {
        defect,
        via_connection: via,
    })
}

/// Mod-kernel distance between the connection of the pulled-back form and
/// the pullback of the connection, measured after applying `G`.
pub fn pullback_consistency(map: &HoloMap, field: &ChartField, z: &[C64]) -> Result<f64> {
    let jac = map.jacobian(z);
    let mut dbar: f64 = 0.0;
    for a in 0..map.dim_in {
        let (_, db) = fd_pair(
            |w| {
                let y = map.apply(w);
                Ok(CMat::from_column_slice(y.len(), 1, &y))
            },
            z,
            a,
            DEFAULT_STEP,
        )?;
        dbar = dbar.max(fro(&db));
    }
    if dbar > 1e-6 * (1.0 + fro(&jac)) {
        return Err(Error::NotHolomorphic { residual: dbar });
    }

    let fz = map.apply(z);
    let reach = field.stencil_reach();
    field.domain().check(&fz, reach * (1.0 + fro(&jac)))?;
    let parent = chern_connection(field, &fz)?;

    let pulled = ChartField::new(
        std::sync::Arc::new(PullbackSource::new(field.source().clone(), map.clone())),
        Domain::new(z.to_vec(), 2.0 * reach),
    )
    .with_rank_tol(field.rank_tol())
    .with_solver_tol(field.solver_tol());
    let pulled = match field.mode() {
        DerivativeMode::Analytic => pulled.analytic_unchecked()?,
        DerivativeMode::FiniteDifference { step, outer_step } => pulled.with_fd(step, outer_step),
    };
    let direct = chern_connection(&pulled, z)?;
    let g = &direct.gram;
    let r = g.nrows();
    let mut worst: f64 = 0.0;
    for p in 0..map.dim_in {
        let transported = (0..map.dim_out).fold(zeros(r, r), |acc, a| acc + &parent.a[a] * jac[(a, p)]);
        let res = fro(&(g * (&direct.a[p] - transported))) / (1.0 + fro(&(g * &direct.a[p])));
        worst = worst.max(res);
    }
    Ok(worst)
}

/// Contracted `(D')²`: `max_{α<β} |G (∂_α A_β - ∂_β A_α + [A_α, A_β])|`,
/// relative to `1 + max |G ∂_α A_β|`.
pub fn holomorphic_curvature_defect(field: &ChartField, z: &[C64]) -> Result<f64> {
    field.constant_rank(z)?;
    let m = field.chart_dim();
    if m < 2 {
        return Ok(0.0);
    }
    let (h, conn): (f64, Box<dyn Fn(&[C64]) -> Result<Vec<CMat>>>) = match field.mode() {
        DerivativeMode::Analytic => (
            DEFAULT_STEP,
            Box::new(|w| {
                let j = field.jet(w)?;
                Ok(solve_connection(&herm_avg(&j.val), &j.d, field.rank_tol()).0)
            }),
        ),
        DerivativeMode::FiniteDifference { outer_step, .. } => {
            (outer_step, Box::new(|w| raw_connection(field, w).map(|x| x.0)))
        }
    };
    let g = field.gram(z)?;
    let a = conn(z)?;
    // da[x][y] = ∂_x A_y
    let da: Vec<Vec<CMat>> = (0..m).map(|x| fd_d_list(&conn, z, x, h)).collect::<Result<_>>()?;
    let scale = da.iter().flatten().map(|d| fro(&(&g * d))).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for x in 0..m {
        for y in x + 1..m {
            let comm = &a[x] * &a[y] - &a[y] * &a[x];
            let f = &da[x][y] - &da[y][x] + comm;
            worst = worst.max(fro(&(&g * f)));
        }
    }
    Ok(worst / (1.0 + scale))
}

/// Ratio of first-derivative errors at steps `h` and `h/2` against the
/// analytic jet; close to 4 for a second-order stencil.
pub fn fd_convergence_ratio(field: &ChartField, z: &[C64], h: f64) -> Result<f64> {
    let jet = field.jet(z)?;
    let err = |step: f64| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for a in 0..field.chart_dim() {
            let (d, db) = fd_pair(|w| Ok(field.source().eval(w)), z, a, step)?;
            worst = worst.max(fro(&(d - &jet.d[a]))).max(fro(&(db - &jet.db[a])));
        }
        Ok(worst)
    };
    field.domain().check(z, h)?;
    Ok(err(h)? / err(0.5 * h)?)
}
