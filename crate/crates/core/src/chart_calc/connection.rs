use crate::error::{Error, Result};
use crate::herm_core::Subspace;
use crate::linalg::{fro, null_space, pinv, CMat, C64};

use super::ChartField;

/// Chern connection matrices `A_α = G⁺ ∂_α G` at a point.
#[derive(Debug, Clone)]
pub struct ConnectionAt {
    pub point: Vec<C64>,
    pub a: Vec<CMat>,
    /// `max_α |G A_α - ∂_α G| / (1 + |∂_α G|)`
    pub residual: f64,
    pub kernel_basis: Subspace,
    pub gram: CMat,
    pub d_gram: Vec<CMat>,
}

pub(crate) fn solve_connection(g: &CMat, d: &[CMat], rank_tol: f64) -> (Vec<CMat>, f64) {
    let gp = pinv(g, rank_tol);
    let mut residual: f64 = 0.0;
    let a = d
        .iter()
        .map(|da| {
            let aa = &gp * da;
            residual = residual.max(fro(&(g * &aa - da)) / (1.0 + fro(da)));
            aa
        })
        .collect();
    (a, residual)
}

/// Connection at `z` without the rank and residual gates.
pub(crate) fn raw_connection(field: &ChartField, z: &[C64]) -> Result<(Vec<CMat>, f64)> {
    let (d, _) = field.first_derivatives(z)?;
    let g = field.gram_unchecked(z);
    Ok(solve_connection(&g, &d, field.rank_tol()))
}

pub fn chern_connection(field: &ChartField, z: &[C64]) -> Result<ConnectionAt> {
    field.constant_rank(z)?;
    let (d, _) = field.first_derivatives(z)?;
    let g = field.gram_unchecked(z);
    let (a, residual) = solve_connection(&g, &d, field.rank_tol());
    if residual > field.solver_tol() {
        return Err(Error::SolverResidual {
            residual,
            tol: field.solver_tol(),
        });
    }
    let kernel_basis = Subspace::span(&null_space(&g, field.rank_tol()));
    Ok(ConnectionAt {
        point: z.to_vec(),
        a,
        residual,
        kernel_basis,
        gram: g,
        d_gram: d,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fields::{ConstantSource, FnSource};
    use super::super::{ChartField, Domain};
    use super::*;
    use crate::jet::MatJet;
    use crate::linalg::{c, cr, eye, from_real_diag};

    fn fs_line() -> FnSource {
        FnSource::new(1, 1, |z| CMat::from_element(1, 1, cr((1.0 + z[0].norm_sqr()).powi(-2))))
    }

    #[test]
    fn constant_field_has_zero_connection() {
        let f = ChartField::from_source(ConstantSource::new(eye(2), 2), Domain::origin(2, 1.0));
        let conn = chern_connection(&f, &[c(0.1, 0.0), c(0.0, 0.2)]).unwrap();
        assert!(conn.a.iter().all(|a| fro(a) < 1e-14));
        assert!(conn.residual < 1e-14);
    }

    #[test]
    fn fubini_study_line_at_one() {
        let f = ChartField::from_source(fs_line(), Domain::origin(1, 2.0));
        let conn = chern_connection(&f, &[cr(1.0)]).unwrap();
        assert!((conn.a[0][(0, 0)] - cr(-1.0)).norm() < 1e-8);
    }

    #[test]
    fn degenerate_diagonal_field() {
        let src = FnSource::from_jet(1, 2, |z| {
            let e = z[0].norm_sqr().exp();
            let zb = z[0].conj();
            MatJet {
                val: from_real_diag(&[e, 0.0]),
                d: vec![CMat::from_fn(2, 2, |i, j| if i + j == 0 { zb * e } else { cr(0.0) })],
                db: vec![CMat::from_fn(2, 2, |i, j| if i + j == 0 { z[0] * e } else { cr(0.0) })],
                dd: vec![vec![CMat::from_fn(2, 2, |i, j| {
                    if i + j == 0 {
                        cr(e * (1.0 + z[0].norm_sqr()))
                    } else {
                        cr(0.0)
                    }
                })]],
            }
        });
        let z = c(0.3, -0.2);
        for f in [
            ChartField::from_source(FnSource::new(1, 2, |z| from_real_diag(&[z[0].norm_sqr().exp(), 0.0])), Domain::origin(1, 1.0)),
            ChartField::from_source(src, Domain::origin(1, 1.0)).analytic().unwrap(),
        ] {
            let conn = chern_connection(&f, &[z]).unwrap();
            assert!((conn.a[0][(0, 0)] - z.conj()).norm() < 1e-7);
            assert!(conn.a[0][(1, 1)].norm() < 1e-12);
            assert!(conn.residual < 1e-9);
            assert_eq!(conn.kernel_basis.dim(), 1);
        }
    }

    #[test]
    fn admissibility_gate() {
        // [[1, z], [z̄, |z|²]] = F*F with F = (1, z) holomorphic: admissible.
        let ok = FnSource::new(1, 2, |z| {
            let a = z[0];
            CMat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => cr(1.0),
                (0, 1) => a,
                (1, 0) => a.conj(),
                _ => cr(a.norm_sqr()),
            })
        });
        let ok = ChartField::from_source(ok, Domain::origin(1, 1.0));
        assert!(chern_connection(&ok, &[c(0.2, 0.1)]).is_ok());

        // Off-diagonal entries growing out of the kernel: ∂G leaves the range of G.
        let bad = FnSource::new(1, 2, |z| {
            let x = z[0].re;
            CMat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => cr(1.0),
                (1, 1) => cr(0.0),
                _ => cr(1e-3 * x),
            })
        });
        let bad = ChartField::from_source(bad, Domain::origin(1, 1.0));
        assert!(matches!(
            chern_connection(&bad, &[cr(0.0)]),
            Err(Error::SolverResidual { .. })
        ));
    }
}
