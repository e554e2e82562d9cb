use rand::Rng;

use crate::error::{Error, Result};
use crate::herm_core::HermitianForm;
use crate::linalg::{eye, fro, herm_avg, pinv, range_basis, CMat, C64};
use crate::sampling::random_cmat;

use super::connection::{chern_connection, raw_connection, solve_connection};
use super::{fd_dbar_list, ChartField, DerivativeMode, DEFAULT_STEP};

/// Curvature tensor at a point.
///
/// `blocks[α][β]` is the `r×r` matrix `R_αβ` with
/// `R(∂_α, ∂̄_β, e_s, ē_t) = R_αβ[(t, s)]`, so that
/// `R(∂_α, ∂̄_β, s, t̄) = t* R_αβ s`.
#[derive(Debug, Clone)]
pub struct CurvatureAt {
    pub point: Vec<C64>,
    pub blocks: Vec<Vec<CMat>>,
    pub form_at_point: HermitianForm,
}

impl CurvatureAt {
    pub fn new(point: Vec<C64>, blocks: Vec<Vec<CMat>>, gram: CMat) -> Self {
        Self {
            point,
            blocks,
            form_at_point: HermitianForm::new(gram).expect("square Gram matrix"),
        }
    }

    pub fn chart_dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn frame_rank(&self) -> usize {
        self.form_at_point.dim()
    }

    /// `R(∂_α, ∂̄_β, e_s, ē_t)`
    pub fn get(&self, alpha: usize, beta: usize, s: usize, t: usize) -> C64 {
        self.blocks[alpha][beta][(t, s)]
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .map(|b| fro(b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn distance(&self, other: &CurvatureAt) -> f64 {
        self.blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(a, b)| fro(&(a - b)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `|R - R'| / (1 + |R'|)`, with `other` as the reference.
    pub fn relative_distance(&self, other: &CurvatureAt) -> f64 {
        self.distance(other) / (1.0 + other.norm())
    }

    /// `max |R_αβ - R_βα*| / (1 + |R|)`.
    pub fn pair_symmetry_residual(&self) -> f64 {
        let m = self.chart_dim();
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                worst = worst.max(fro(&(&self.blocks[a][b] - self.blocks[b][a].adjoint())));
            }
        }
        worst / (1.0 + self.norm())
    }

    /// `R(v, v̄, s, s̄)` for a tangent direction `v` and section value `s`.
    pub fn bisectional(&self, v: &[C64], s: &[C64]) -> C64 {
        let sv = crate::linalg::CVec::from_column_slice(s);
        let mut acc = C64::new(0.0, 0.0);
        for (a, va) in v.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                acc += va * vb.conj() * (sv.adjoint() * &self.blocks[a][b] * &sv)[(0, 0)];
            }
        }
        acc
    }
}

fn exact_connection(field: &ChartField, w: &[C64]) -> Result<Vec<CMat>> {
    let j = field.jet(w)?;
    let g = herm_avg(&j.val);
    Ok(solve_connection(&g, &j.d, field.rank_tol()).0)
}

/// Connection evaluator and difference step used for curvature by differencing.
fn connection_route(field: &ChartField) -> (f64, Box<dyn Fn(&[C64]) -> Result<Vec<CMat>> + '_>) {
    match field.mode() {
        DerivativeMode::Analytic => (DEFAULT_STEP, Box::new(move |w| exact_connection(field, w))),
        DerivativeMode::FiniteDifference { outer_step, .. } => {
            (outer_step, Box::new(move |w| raw_connection(field, w).map(|x| x.0)))
        }
    }
}

/// `R_αβ = -G(z) ∂̄_β A_α` with `∂̄` taken by central differences of `conn`.
pub fn curvature_from_connection<F>(field: &ChartField, z: &[C64], conn: F, h: f64) -> Result<CurvatureAt>
where
    F: Fn(&[C64]) -> Result<Vec<CMat>>,
{
    let g = field.gram(z)?;
    let m = field.chart_dim();
    let mut blocks = vec![vec![CMat::zeros(0, 0); m]; m];
    for b in 0..m {
        let dbar = fd_dbar_list(&conn, z, b, h)?;
        for (a, da) in dbar.iter().enumerate() {
            blocks[a][b] = -(&g * da);
        }
    }
    Ok(CurvatureAt::new(z.to_vec(), blocks, g))
}

/// Curvature tensor of the Chern connection.
///
/// Analytic mode uses `R_αβ = -∂̄_β∂_α G + ∂̄_β G · G⁺ · ∂_α G`, which follows
/// from differentiating `G A_α = ∂_α G`. Difference mode differentiates the
/// connection itself with nested central differences.
pub fn curvature_tensor(field: &ChartField, z: &[C64]) -> Result<CurvatureAt> {
    field.constant_rank(z)?;
    match field.mode() {
        DerivativeMode::Analytic => {
            let j = field.jet(z)?;
            let g = herm_avg(&j.val);
            let gp = pinv(&g, field.rank_tol());
            let (_, residual) = solve_connection(&g, &j.d, field.rank_tol());
            if residual > field.solver_tol() {
                return Err(Error::SolverResidual {
                    residual,
                    tol: field.solver_tol(),
                });
            }
            let m = field.chart_dim();
            let blocks = (0..m)
                .map(|a| {
                    (0..m)
                        .map(|b| &j.db[b] * &gp * &j.d[a] - &j.dd[a][b])
                        .collect()
                })
                .collect();
            Ok(CurvatureAt::new(z.to_vec(), blocks, g))
        }
        DerivativeMode::FiniteDifference { .. } => {
            chern_connection(field, z)?;
            let (h, conn) = connection_route(field);
            curvature_from_connection(field, z, conn, h)
        }
    }
}

/// Smooth kernel-valued connection perturbation `K_α(w) = (I - P(w)) M_α(w)`,
/// where `P(w)` projects onto the range of `G(w)` and `M_α` is a random
/// polynomial in `w` and `w̄`.
#[derive(Debug, Clone)]
pub struct KernelPerturbation {
    center: Vec<C64>,
    constant: Vec<CMat>,
    holo: Vec<Vec<CMat>>,
    antiholo: Vec<Vec<CMat>>,
}

impl KernelPerturbation {
    pub fn random<R: Rng>(rng: &mut R, chart_dim: usize, frame_rank: usize, center: &[C64]) -> Self {
        let m = chart_dim;
        let r = frame_rank;
        let mut draw = |s| random_cmat(rng, r, r, s);
        let constant = (0..m).map(|_| draw(1.0)).collect();
        let holo = (0..m).map(|_| (0..m).map(|_| draw(1.0)).collect()).collect();
        let antiholo = (0..m).map(|_| (0..m).map(|_| draw(1.0)).collect()).collect();
        Self {
            center: center.to_vec(),
            constant,
            holo,
            antiholo,
        }
    }

    pub fn eval(&self, field: &ChartField, w: &[C64]) -> Vec<CMat> {
        let g = field.gram_unchecked(w);
        let u = range_basis(&g, field.rank_tol());
        let proj = eye(g.nrows()) - &u * u.adjoint();
        self.constant
            .iter()
            .enumerate()
            .map(|(a, k0)| {
                let mut m = k0.clone();
                for (g_idx, (wz, cz)) in w.iter().zip(&self.center).enumerate() {
                    let dz = wz - cz;
                    m += &self.holo[a][g_idx] * dz + &self.antiholo[a][g_idx] * dz.conj();
                }
                &proj * m
            })
            .collect()
    }
}

/// `|R(A) - R(A + K)| / (1 + |R(A)|)`, both sides by differencing the connection.
pub fn gauge_independence_residual(field: &ChartField, z: &[C64], k: &KernelPerturbation) -> Result<f64> {
    field.constant_rank(z)?;
    let (h, conn) = connection_route(field);
    let r0 = curvature_from_connection(field, z, &conn, h)?;
    let perturbed = |w: &[C64]| -> Result<Vec<CMat>> {
        let a = conn(w)?;
        Ok(a.iter().zip(k.eval(field, w)).map(|(x, y)| x + y).collect())
    };
    let r1 = curvature_from_connection(field, z, perturbed, h)?;
    Ok(r1.distance(&r0) / (1.0 + r0.norm()))
}

#[cfg(test)]
mod tests {
    use super::super::fields::{ConstantSource, FnSource, PotentialSource};
    use super::super::{ChartField, Domain};
    use super::*;
    use crate::jet::{HoloJet, HoloScalar};
    use crate::linalg::{c, cr, from_real_diag, zeros};
    use crate::sampling::sample_rng;

    fn fs_line_potential() -> PotentialSource {
        PotentialSource::new(1, |z| {
            HoloJet::from_components(&[HoloScalar::constant(cr(1.0), 1), HoloScalar::coord(z, 0)], 1)
        })
    }

    #[test]
    fn constant_field_is_flat() {
        let f = ChartField::from_source(ConstantSource::new(from_real_diag(&[2.0, 1.0]), 1), Domain::origin(1, 1.0));
        assert!(curvature_tensor(&f, &[c(0.1, 0.1)]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn fubini_study_line_origin_both_routes() {
        let fd = ChartField::from_source(fs_line_potential(), Domain::origin(1, 1.0));
        let an = fd.clone().analytic().unwrap();
        let r_an = curvature_tensor(&an, &[cr(0.0)]).unwrap();
        let r_fd = curvature_tensor(&fd, &[cr(0.0)]).unwrap();
        assert!((r_an.get(0, 0, 0, 0) - cr(2.0)).norm() < 1e-12);
        assert!((r_fd.get(0, 0, 0, 0) - cr(2.0)).norm() < 1e-5);
    }

    #[test]
    fn tautological_line_origin() {
        let f = FnSource::new(1, 1, |z| CMat::from_element(1, 1, cr(1.0 + z[0].norm_sqr())));
        let f = ChartField::from_source(f, Domain::origin(1, 1.0));
        let r = curvature_tensor(&f, &[cr(0.0)]).unwrap();
        assert!((r.get(0, 0, 0, 0) - cr(-1.0)).norm() < 1e-5);
        let z = c(0.4, 0.3);
        let r = curvature_tensor(&f, &[z]).unwrap();
        assert!((r.get(0, 0, 0, 0).re + 1.0 / (1.0 + z.norm_sqr())).abs() < 1e-5);
    }

    #[test]
    fn pair_symmetry_on_two_dim_potential() {
        let p = PotentialSource::new(2, |z| {
            let x = HoloScalar::coord(z, 0);
            let y = HoloScalar::coord(z, 1);
            HoloJet::from_components(&[HoloScalar::constant(cr(1.0), 2), x.clone(), y.clone(), x.mul(&y)], 2)
        });
        let f = ChartField::from_source(p, Domain::origin(2, 1.0)).analytic().unwrap();
        let r = curvature_tensor(&f, &[c(0.2, -0.1), c(0.3, 0.25)]).unwrap();
        assert!(r.pair_symmetry_residual() < 1e-12);
        let fd = f.clone().with_fd(1e-4, 1e-3);
        let r_fd = curvature_tensor(&fd, &[c(0.2, -0.1), c(0.3, 0.25)]).unwrap();
        assert!(r_fd.relative_distance(&r) < 1e-5);
    }

    #[test]
    fn gauge_perturbation_on_degenerate_field() {
        let f = FnSource::new(1, 2, |z| from_real_diag(&[z[0].norm_sqr().exp(), 0.0]));
        let f = ChartField::from_source(f, Domain::origin(1, 1.0));
        let z = [c(0.2, 0.3)];
        for i in 0..5 {
            let k = KernelPerturbation::random(&mut sample_rng(3, i), 1, 2, &z);
            assert!(gauge_independence_residual(&f, &z, &k).unwrap() < 1e-6);
        }
        let zero = FnSource::new(1, 2, |_| zeros(2, 2));
        let zero = ChartField::from_source(zero, Domain::origin(1, 1.0));
        let k = KernelPerturbation::random(&mut sample_rng(3, 9), 1, 2, &z);
        assert!(gauge_independence_residual(&zero, &z, &k).unwrap() < 1e-14);
    }
}
