//! Model geometries: Fubini–Study, Grassmannian charts built two ways,
//! Ricci/Einstein checks, extremal holomorphic sectional curvature, and the
//! fibration models consumed by [`crate::fibration`].

use std::cmp::Ordering;
use std::sync::Arc;

use serde::Serialize;

use crate::chart_calc::fields::{ConstantSource, FnSource, PotentialSource};
use crate::chart_calc::{curvature_tensor, fd_pair, hsc_from_curvature, ChartField, CurvatureAt, Domain};
use crate::error::{Error, Result};
use crate::fibration::FibrationModel;
use crate::jet::{HoloJet, HoloScalar, MatJet};
use crate::linalg::{cr, eye, fro, herm_avg, inv, CMat, C64};
use crate::par::{self, Exec};
use crate::sampling::{normalize, polydisc_point, sample_rng, sphere_direction};

/// Chart radius used for projective-space fields.
pub const FS_DOMAIN_RADIUS: f64 = 2.0;
/// Default sampling radius for projective-space charts.
pub const FS_REGION_RADIUS: f64 = 0.9;
/// Chart radius (entrywise) for Grassmannian and fibration fields.
pub const GR_DOMAIN_RADIUS: f64 = 1.0;
/// Default sampling radius for Grassmannian and fibration charts.
pub const GR_REGION_RADIUS: f64 = 0.7;

fn potential_components(z: &[C64], comps: Vec<HoloScalar>) -> HoloJet {
    HoloJet::from_components(&comps, z.len())
}

/// `p(z) = (1, z_1, ..., z_n)`.
pub fn fs_coordinates(z: &[C64]) -> HoloJet {
    let m = z.len();
    let mut comps = vec![HoloScalar::constant(cr(1.0), m)];
    comps.extend((0..m).map(|a| HoloScalar::coord(z, a)));
    potential_components(z, comps)
}

/// Tangent Gram field of `log(1 + |z|²)` on the standard chart of `P^n`.
pub fn fubini_study_chart(n: usize) -> Result<ChartField> {
    if n == 0 {
        return Err(Error::InvalidModel("projective space needs n >= 1".into()));
    }
    ChartField::from_source(PotentialSource::new(n, fs_coordinates), Domain::origin(n, FS_DOMAIN_RADIUS))
        .with_label(format!("fs:{n}"))
        .analytic()
}

/// Constant identity metric on `C^m`.
pub fn flat_chart(m: usize) -> Result<ChartField> {
    if m == 0 {
        return Err(Error::InvalidModel("flat chart needs m >= 1".into()));
    }
    ChartField::from_source(ConstantSource::new(eye(m), m), Domain::origin(m, FS_DOMAIN_RADIUS))
        .with_label(format!("flat:{m}"))
        .analytic()
}

fn check_grassmannian(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::InvalidModel(format!("Gr({k},{n}) needs 1 <= k < n")));
    }
    Ok(())
}

/// Chart `Z -> row space of [I_k | Z]` of `Gr(k, n)`.
#[derive(Debug, Clone)]
pub struct GrassmannChartModel {
    pub k: usize,
    pub n: usize,
    pub field: ChartField,
}

impl GrassmannChartModel {
    pub fn chart_dim(&self) -> usize {
        self.k * (self.n - self.k)
    }

    /// Flattens `Z` row-major into chart coordinates.
    pub fn coords(&self, z: &CMat) -> Vec<C64> {
        (0..self.k)
            .flat_map(|a| (0..self.n - self.k).map(move |b| (a, b)))
            .map(|(a, b)| z[(a, b)])
            .collect()
    }

    /// Unit coordinate direction `E_ab`.
    pub fn direction(&self, a: usize, b: usize) -> Vec<C64> {
        let mut v = vec![cr(0.0); self.chart_dim()];
        v[a * (self.n - self.k) + b] = cr(1.0);
        v
    }
}

fn z_jet(z: &[C64], k: usize, q: usize) -> MatJet {
    let val = CMat::from_fn(k, q, |a, b| z[a * q + b]);
    let d = (0..k * q)
        .map(|idx| CMat::from_fn(k, q, |a, b| cr(if a * q + b == idx { 1.0 } else { 0.0 })))
        .collect();
    MatJet::holomorphic(val, d)
}

/// Gram jet of `g(V, W) = tr((I + ZZ*)⁻¹ V (I + Z*Z)⁻¹ W*)`.
///
/// With `A = (I + ZZ*)⁻¹` and `B = (I + Z*Z)⁻¹` the entry for
/// `b(E_cd, Ē_ab)` is `A[a, c] B[d, b]`, i.e. `G = A ⊗ Bᵀ`.
pub fn hom_route_jet(z: &[C64], k: usize, n: usize) -> MatJet {
    let q = n - k;
    let m = k * q;
    let zj = z_jet(z, k, q);
    let a = MatJet::constant(eye(k), m).add(&zj.mul(&zj.adjoint())).inverse();
    let b = MatJet::constant(eye(q), m).add(&zj.adjoint().mul(&zj)).inverse();
    a.kron_t(&b)
}

pub fn grassmannian_chart(k: usize, n: usize) -> Result<GrassmannChartModel> {
    check_grassmannian(k, n)?;
    let m = k * (n - k);
    let field = ChartField::from_source(
        FnSource::from_jet(m, m, move |z| hom_route_jet(z, k, n)),
        Domain::origin(m, GR_DOMAIN_RADIUS),
    )
    .with_label(format!("gr:{k}:{n}"))
    .analytic()?;
    Ok(GrassmannChartModel { k, n, field })
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let inversions = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

/// Plücker coordinates of `[I_k | Z]` with their holomorphic jets.
pub fn pluecker_coordinates(z: &[C64], k: usize, n: usize) -> HoloJet {
    let q = n - k;
    let m = k * q;
    let entry = |i: usize, col: usize| -> HoloScalar {
        if col < k {
            HoloScalar::constant(cr(if i == col { 1.0 } else { 0.0 }), m)
        } else {
            HoloScalar::coord(z, i * q + (col - k))
        }
    };
    let perms = permutations(k);
    let comps: Vec<HoloScalar> = k_subsets(n, k)
        .iter()
        .map(|cols| {
            perms.iter().fold(HoloScalar::constant(cr(0.0), m), |acc, (p, sign)| {
                let term = (0..k).fold(HoloScalar::constant(cr(*sign), m), |t, i| t.mul(&entry(i, cols[p[i]])));
                acc.add(&term)
            })
        })
        .collect();
    HoloJet::from_components(&comps, m)
}

/// `∂∂̄ log ‖p(Z)‖²` for the Plücker coordinates `p`.
pub fn pluecker_pullback(k: usize, n: usize) -> Result<ChartField> {
    check_grassmannian(k, n)?;
    let m = k * (n - k);
    ChartField::from_source(
        PotentialSource::new(m, move |z| pluecker_coordinates(z, k, n)),
        Domain::origin(m, GR_DOMAIN_RADIUS),
    )
    .with_label(format!("pl:{k}:{n}"))
    .analytic()
}

/// Ricci form in the Gram convention: entry `[β][α]` is `-∂_α∂̄_β log det G`,
/// computed as `tr(G⁻¹ R_αβ)`.
pub fn ricci(field: &ChartField, z: &[C64]) -> Result<CMat> {
    ricci_from_curvature(&curvature_tensor(field, z)?)
}

pub fn ricci_from_curvature(curv: &CurvatureAt) -> Result<CMat> {
    let g = curv.form_at_point.gram();
    if !crate::linalg::is_pd(g, curv.form_at_point.rank_tol()) {
        return Err(Error::NotPositiveAtPoint);
    }
    let gi = inv(g);
    let m = curv.chart_dim();
    Ok(CMat::from_fn(m, m, |b, a| crate::linalg::trace(&(&gi * &curv.blocks[a][b]))))
}

/// `-∂_α∂̄_β log det G` by nested central differences of the scalar `log det G`.
pub fn ricci_fd(field: &ChartField, z: &[C64]) -> Result<CMat> {
    let (h_in, h_out) = (1e-4, 1e-3);
    field.domain().check(z, h_in + h_out)?;
    let g0 = field.gram(z)?;
    if !crate::linalg::is_pd(&g0, field.rank_tol()) {
        return Err(Error::NotPositiveAtPoint);
    }
    let logdet = |w: &[C64]| -> Result<CMat> {
        let g = herm_avg(&field.source().eval(w));
        let (vals, _) = crate::linalg::herm_eig(&g);
        Ok(CMat::from_element(1, 1, cr(vals.iter().map(|v| v.ln()).sum())))
    };
    let m = field.chart_dim();
    let mut out = CMat::zeros(m, m);
    for a in 0..m {
        let d_a = |w: &[C64]| fd_pair(logdet, w, a, h_in).map(|(d, _)| d);
        for b in 0..m {
            let (_, dbar) = fd_pair(d_a, z, b, h_out)?;
            out[(b, a)] = -dbar[(0, 0)];
        }
    }
    Ok(out)
}

/// `max_z |Ric - n G| / |G|` over the given points.
pub fn einstein_residual(field: &ChartField, n: f64, points: &[Vec<C64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in points {
        let g = field.gram(z)?;
        let ric = ricci(field, z)?;
        worst = worst.max(fro(&(ric - &g * cr(n))) / fro(&g));
    }
    Ok(worst)
}

/// Deterministic sample points of a polydisc region.
pub fn region_points(region: &Domain, count: usize, seed: u64) -> Vec<Vec<C64>> {
    (0..count)
        .map(|i| polydisc_point(&mut sample_rng(seed, i as u64), &region.center, region.radius))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HscSample {
    pub value: f64,
    #[serde(with = "crate::json::cvec")]
    pub point: Vec<C64>,
    #[serde(with = "crate::json::cvec")]
    pub direction: Vec<C64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HscScanResult {
    pub min_h: f64,
    pub max_h: f64,
    pub argmin: HscSample,
    pub argmax: HscSample,
    /// Extremes over the raw samples, before refinement.
    pub sampled_min: f64,
    pub sampled_max: f64,
    pub samples: usize,
    pub refinement_steps: usize,
    pub region: Domain,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub samples: usize,
    pub refinement_steps: usize,
    /// Number of best samples refined for each extreme.
    pub refine_starts: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            samples: 2000,
            refinement_steps: 200,
            refine_starts: 4,
            seed: 0,
            exec: Exec::Auto,
        }
    }
}

fn cmp_value(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// Projected ascent of `sign · H` on the unit sphere at a fixed point,
/// with central-difference gradients and an adaptive step.
pub fn refine_direction(curv: &CurvatureAt, v0: &[C64], steps: usize, sign: f64) -> Result<(f64, Vec<C64>)> {
    let m = v0.len();
    let f = |v: &[C64]| hsc_from_curvature(curv, v).map(|h| sign * h);
    let mut v = normalize(v0);
    let mut fv = f(&v)?;
    let mut eta = 0.2;
    let h = 1e-6;
    for _ in 0..steps {
        let mut grad = vec![cr(0.0); m];
        for (a, g) in grad.iter_mut().enumerate() {
            for (unit, slot) in [(cr(1.0), 0), (C64::new(0.0, 1.0), 1)] {
                let mut vp = v.clone();
                let mut vm = v.clone();
                vp[a] += unit * h;
                vm[a] -= unit * h;
                let d = (f(&vp)? - f(&vm)?) / (2.0 * h);
                if slot == 0 {
                    g.re = d;
                } else {
                    g.im = d;
                }
            }
        }
        let gnorm = grad.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        loop {
            let cand: Vec<C64> = normalize(&v.iter().zip(&grad).map(|(x, g)| x + g * (eta / gnorm)).collect::<Vec<_>>());
            let fc = f(&cand)?;
            if fc > fv {
                v = cand;
                fv = fc;
                eta = (eta * 1.5).min(1.0);
                break;
            }
            eta *= 0.5;
            if eta < 1e-10 {
                break;
            }
        }
        if eta < 1e-10 {
            break;
        }
    }
    Ok((sign * fv, v))
}

/// Seeded sample-then-refine search for the extremes of `H` on a region.
pub fn hsc_extremes(field: &ChartField, region: &Domain, opts: &ScanOptions) -> Result<HscScanResult> {
    let m = field.chart_dim();
    let samples = opts.samples.max(1);
    let raw: Vec<Result<HscSample>> = par::map_indexed(samples, opts.exec, |i| {
        let mut rng = sample_rng(opts.seed, i as u64);
        let point = polydisc_point(&mut rng, &region.center, region.radius);
        let direction = sphere_direction(&mut rng, m);
        let curv = curvature_tensor(field, &point)?;
        let value = hsc_from_curvature(&curv, &direction)?;
        Ok(HscSample { value, point, direction })
    });
    let raw: Vec<HscSample> = raw.into_iter().collect::<Result<_>>()?;
    let mut order: Vec<(usize, f64)> = raw.iter().enumerate().map(|(i, s)| (i, s.value)).collect();
    order.sort_by(cmp_value);
    let sampled_min = order[0].1;
    let sampled_max = order[order.len() - 1].1;

    let starts = opts.refine_starts.clamp(1, samples);
    let mut jobs: Vec<(usize, f64)> = order[..starts].iter().map(|&(i, _)| (i, -1.0)).collect();
    jobs.extend(order[samples - starts..].iter().map(|&(i, _)| (i, 1.0)));
    let refined: Vec<Result<(f64, HscSample)>> = par::map_slice(&jobs, opts.exec, |&(i, sign)| {
        let s = &raw[i];
        let curv = curvature_tensor(field, &s.point)?;
        let (value, direction) = refine_direction(&curv, &s.direction, opts.refinement_steps, sign)?;
        Ok((
            sign,
            HscSample {
                value,
                point: s.point.clone(),
                direction,
            },
        ))
    });
    let refined: Vec<(f64, HscSample)> = refined.into_iter().collect::<Result<_>>()?;

    let pick = |sign: f64, fallback: &HscSample| -> HscSample {
        refined
            .iter()
            .filter(|(s, _)| *s == sign)
            .map(|(_, x)| x)
            .chain(std::iter::once(fallback))
            .fold(None::<&HscSample>, |best, x| match best {
                Some(b) if sign * b.value >= sign * x.value => Some(b),
                _ => Some(x),
            })
            .expect("non-empty")
            .clone()
    };
    let argmin = pick(-1.0, &raw[order[0].0]);
    let argmax = pick(1.0, &raw[order[samples - 1].0]);
    Ok(HscScanResult {
        min_h: argmin.value,
        max_h: argmax.value,
        argmin,
        argmax,
        sampled_min,
        sampled_max,
        samples,
        refinement_steps: opts.refinement_steps,
        region: region.clone(),
        seed: opts.seed,
    })
}

fn line_coords(z: &[C64], coord: usize) -> HoloJet {
    let m = z.len();
    potential_components(z, vec![HoloScalar::constant(cr(1.0), m), HoloScalar::coord(z, coord)])
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `p(z, w) = (1, √C(k,j) z^j w)_{j=0..k}`, so that
/// `‖p‖² = 1 + (1 + |z|²)^k |w|²`.
pub fn hirzebruch_coordinates(z: &[C64], k: u32) -> HoloJet {
    let m = z.len();
    let zc = HoloScalar::coord(z, 0);
    let w = HoloScalar::coord(z, 1);
    let mut comps = vec![HoloScalar::constant(cr(1.0), m)];
    let mut zpow = HoloScalar::constant(cr(1.0), m);
    for j in 0..=k {
        comps.push(zpow.mul(&w).scale(cr(binomial(k as usize, j as usize).sqrt())));
        zpow = zpow.mul(&zc);
    }
    potential_components(z, comps)
}

/// Product chart `(z, w)` over a line base: `b₁` is the fiber field pulled
/// back along the fiber projection, `b₂` the base field pulled back along `π`.
pub fn product_model(base: &ChartField, fiber: &ChartField) -> Result<FibrationModel> {
    let (mb, mf) = (base.chart_dim(), fiber.chart_dim());
    let m = mb + mf;
    let embed = |src: Arc<dyn crate::chart_calc::FormSource>, offset: usize, dim: usize| {
        let s2 = src.clone();
        FnSource::from_jet(m, m, move |z: &[C64]| {
            let local: Vec<C64> = z[offset..offset + dim].to_vec();
            let j = s2.jet(&local).expect("analytic factor");
            embed_jet(&j, offset, m)
        })
    };
    let analytic = base.mode().is_analytic() && fiber.mode().is_analytic();
    if !analytic {
        return Err(Error::InvalidModel("product model needs analytic factors".into()));
    }
    let b1 = ChartField::from_source(embed(fiber.source().clone(), mb, mf), Domain::origin(m, GR_DOMAIN_RADIUS))
        .with_label(format!("fiber[{}]", fiber.label()))
        .analytic()?;
    let b2 = ChartField::from_source(embed(base.source().clone(), 0, mb), Domain::origin(m, GR_DOMAIN_RADIUS))
        .with_label(format!("base[{}]", base.label()))
        .analytic()?;
    FibrationModel::new(
        format!("prod:{}:{}", base.label(), fiber.label()),
        mb,
        mf,
        b1,
        b2,
        Domain::origin(m, GR_REGION_RADIUS),
    )
}

/// Places a jet in coordinates `offset..offset+dim` of an `m`-dimensional chart
/// and frame, padding with zeros.
fn embed_jet(j: &MatJet, offset: usize, m: usize) -> MatJet {
    let dim = j.chart_dim();
    let pad = |x: &CMat| {
        let mut out = CMat::zeros(m, m);
        out.view_mut((offset, offset), (dim, dim)).copy_from(x);
        out
    };
    let zero = CMat::zeros(m, m);
    let pick = |v: &Vec<CMat>, a: usize| if a >= offset && a < offset + dim { pad(&v[a - offset]) } else { zero.clone() };
    MatJet {
        val: pad(&j.val),
        d: (0..m).map(|a| pick(&j.d, a)).collect(),
        db: (0..m).map(|a| pick(&j.db, a)).collect(),
        dd: (0..m)
            .map(|a| {
                (0..m)
                    .map(|b| {
                        if a >= offset && a < offset + dim && b >= offset && b < offset + dim {
                            pad(&j.dd[a - offset][b - offset])
                        } else {
                            zero.clone()
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Twisted projective-line fibration on the bidisc `(z, w)`: `b₁` is the
/// Gram field of `log(1 + (1 + |z|²)^k |w|²)`, `b₂` the base Fubini–Study
/// form `log(1 + |z|²)` pulled back along `(z, w) -> z`.
pub fn hirzebruch_model(k: u32) -> Result<FibrationModel> {
    let domain = Domain::origin(2, GR_DOMAIN_RADIUS);
    let b1 = ChartField::from_source(PotentialSource::new(2, move |z| hirzebruch_coordinates(z, k)), domain.clone())
        .with_label(format!("hirz{k}-vertical"))
        .analytic()?;
    let b2 = ChartField::from_source(PotentialSource::new(2, |z| line_coords(z, 0)), domain)
        .with_label("fs-base")
        .analytic()?;
    FibrationModel::new(format!("hirz:{k}"), 1, 1, b1, b2, Domain::origin(2, GR_REGION_RADIUS))
}

/// A single metric with its scan region and known invariants.
#[derive(Debug, Clone)]
pub struct MetricModel {
    pub id: String,
    pub field: ChartField,
    pub region: Domain,
    /// `n` in `Ric = n g`, when the metric is Kähler–Einstein with that constant.
    pub einstein_constant: Option<f64>,
    /// Claimed bounds on `H`: `[2/k², 2]` for Grassmannians, exact values for `fs` and `flat`.
    pub hsc_bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub enum Model {
    Metric(MetricModel),
    Fibration(FibrationModel),
}

fn parse_usize(s: &str, id: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::UnknownModel(id.to_string()))
}

fn factor(id: &str, whole: &str) -> Result<ChartField> {
    match id {
        "fs1" => fubini_study_chart(1),
        "flat1" => flat_chart(1),
        _ => Err(Error::UnknownModel(whole.to_string())),
    }
}

/// Resolves registry ids: `fs:N`, `flat:M`, `gr:K:N`, `pl:K:N`,
/// `prod:BASE:FIBER` (factors `fs1`, `flat1`), `hirz:K`.
pub fn model_by_id(id: &str) -> Result<Model> {
    let parts: Vec<&str> = id.split(':').collect();
    let metric = |field: ChartField, region_radius: f64, ein: Option<f64>, bounds: Option<(f64, f64)>| {
        let m = field.chart_dim();
        Model::Metric(MetricModel {
            id: id.to_string(),
            field,
            region: Domain::origin(m, region_radius),
            einstein_constant: ein,
            hsc_bounds: bounds,
        })
    };
    match parts.as_slice() {
        ["fs", n] => {
            let n = parse_usize(n, id)?;
            Ok(metric(fubini_study_chart(n)?, FS_REGION_RADIUS, Some((n + 1) as f64), Some((2.0, 2.0))))
        }
        ["flat", m] => Ok(metric(flat_chart(parse_usize(m, id)?)?, FS_REGION_RADIUS, Some(0.0), Some((0.0, 0.0)))),
        ["gr", k, n] | ["pl", k, n] => {
            let (k, n) = (parse_usize(k, id)?, parse_usize(n, id)?);
            let field = if parts[0] == "gr" {
                grassmannian_chart(k, n)?.field
            } else {
                pluecker_pullback(k, n)?
            };
            let kk = k.min(n - k) as f64;
            Ok(metric(field, GR_REGION_RADIUS, Some(n as f64), Some((2.0 / (kk * kk), 2.0))))
        }
        ["prod", base, fiber] => Ok(Model::Fibration(product_model(&factor(base, id)?, &factor(fiber, id)?)?)),
        ["hirz", k] => Ok(Model::Fibration(hirzebruch_model(parse_usize(k, id)? as u32)?)),
        _ => Err(Error::UnknownModel(id.to_string())),
    }
}
