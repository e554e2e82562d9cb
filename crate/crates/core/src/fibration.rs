//! The family `h_λ = b₁ + e^λ b₂` on a fibration chart, its quotient forms,
//! the decomposition of its curvature, and the search for a positivity
//! threshold `λ₀`.

use serde::Serialize;

use crate::chart_calc::fields::RestrictedSource;
use crate::chart_calc::{curvature_tensor, hsc, hsc_from_curvature, ChartField, CurvatureAt, Domain};
use crate::error::{Error, Result};
use crate::herm_core::{limit_form, HermitianForm};
use crate::linalg::{fro, herm_eig, pd_ratio, CMat, C64};
use crate::models::{hsc_extremes, region_points, HscSample, ScanOptions};
use crate::par::Exec;
use crate::sampling::{sample_rng, sphere_direction};
use crate::sequences::{sum_curvature, weighted_sum_field};

/// Points checked when validating a model.
const VALIDATION_POINTS: usize = 10;
/// `b₂` must annihilate vertical directions to this accuracy.
const VERTICAL_KERNEL_TOL: f64 = 1e-12;

/// Chart of a fibration `X → B` with coordinates `(base, fiber)`: base
/// coordinates first, then fiber coordinates.
#[derive(Debug, Clone)]
pub struct FibrationModel {
    pub label: String,
    pub base_dim: usize,
    pub fiber_dim: usize,
    /// `h_{X/B}`, positive on fiber directions.
    pub b1: ChartField,
    /// `π* h_B`, vanishing on fiber directions.
    pub b2: ChartField,
    pub region: Domain,
}

impl FibrationModel {
    pub fn new(
        label: impl Into<String>,
        base_dim: usize,
        fiber_dim: usize,
        b1: ChartField,
        b2: ChartField,
        region: Domain,
    ) -> Result<Self> {
        let m = base_dim + fiber_dim;
        if base_dim == 0 || fiber_dim == 0 {
            return Err(Error::InvalidModel("base and fiber dimensions must be positive".into()));
        }
        for f in [&b1, &b2] {
            if f.chart_dim() != m || f.frame_rank() != m {
                return Err(Error::DimensionMismatch(format!(
                    "field `{}` is not a tangent field on a {m}-dimensional chart",
                    f.label()
                )));
            }
        }
        if region.center.len() != m {
            return Err(Error::DimensionMismatch("region dimension".into()));
        }
        let model = Self {
            label: label.into(),
            base_dim,
            fiber_dim,
            b1,
            b2,
            region,
        };
        let mut points = vec![model.region.center.clone()];
        points.extend(region_points(&model.region, VALIDATION_POINTS, 0x0f1b));
        for z in &points {
            let g1 = model.b1.gram(z)?;
            let ratio = pd_ratio(&model.vertical_block(&g1));
            if ratio <= model.b1.rank_tol() {
                return Err(Error::InvalidModel(format!(
                    "b1 is not positive on fiber directions (eigenvalue ratio {ratio:.3e})"
                )));
            }
            let g2 = model.b2.gram(z)?;
            let leak = fro(&g2.columns(base_dim, fiber_dim).into_owned());
            if leak > VERTICAL_KERNEL_TOL * (1.0 + fro(&g2)) {
                return Err(Error::InvalidModel(format!(
                    "b2 does not vanish on fiber directions (residual {leak:.3e})"
                )));
            }
        }
        Ok(model)
    }

    pub fn chart_dim(&self) -> usize {
        self.base_dim + self.fiber_dim
    }

    pub fn fiber_coords(&self) -> Vec<usize> {
        (self.base_dim..self.chart_dim()).collect()
    }

    /// Fiber-direction block of a tangent Gram matrix.
    pub fn vertical_block(&self, g: &CMat) -> CMat {
        g.view((self.base_dim, self.base_dim), (self.fiber_dim, self.fiber_dim)).into_owned()
    }

    /// Metric of the fiber through `z`: `b₁` restricted to the fiber slice.
    pub fn fiber_field(&self, z: &[C64]) -> Result<ChartField> {
        let coords = self.fiber_coords();
        let radius = self.b1.domain().radius;
        let f = ChartField::from_source(
            RestrictedSource::new(self.b1.source().clone(), z.to_vec(), coords),
            Domain::new(
                self.b1.domain().center[self.base_dim..].to_vec(),
                radius,
            ),
        )
        .with_label(format!("{}-fiber", self.label));
        if self.b1.mode().is_analytic() {
            f.analytic_unchecked()
        } else {
            Ok(f)
        }
    }
}

/// `b₁ + e^λ b₂`.
pub fn h_lambda(model: &FibrationModel, lambda: f64) -> Result<ChartField> {
    Ok(weighted_sum_field(&[(1.0, &model.b1), (lambda.exp(), &model.b2)])?.with_label(format!("{}@{lambda}", model.label)))
}

/// Smallest eigenvalue of `G(z)`.
pub fn min_eigenvalue(field: &ChartField, z: &[C64]) -> Result<f64> {
    Ok(herm_eig(&field.gram(z)?).0[0])
}

#[derive(Debug, Clone)]
pub struct RLambda {
    pub lambda: f64,
    pub direct: CurvatureAt,
    /// Present when both summands have constant rank near the point.
    pub formula: Option<CurvatureAt>,
    pub residual: Option<f64>,
    /// Reason the formula route was skipped.
    pub not_applicable: Option<String>,
}

/// Direct curvature of `h_λ` and, where the rank checks pass, the
/// decomposition `R_{b₁} + e^λ R_{b₂} - σ*q_λσ`.
pub fn r_lambda_decomposed(model: &FibrationModel, lambda: f64, z: &[C64]) -> Result<RLambda> {
    let h = h_lambda(model, lambda)?;
    let g = h.gram(z)?;
    let ratio = pd_ratio(&g);
    if ratio <= h.rank_tol() {
        return Err(Error::NotPositive { ratio });
    }
    let direct = curvature_tensor(&h, z)?;
    let scaled_b2 = weighted_sum_field(&[(lambda.exp(), &model.b2)])?;
    let rank_issue = [&model.b1, &scaled_b2].iter().find_map(|f| match f.constant_rank(z) {
        Ok(_) => None,
        Err(e @ Error::RankJump { .. }) => Some(e.to_string()),
        Err(_) => None,
    });
    if let Some(reason) = rank_issue {
        return Ok(RLambda {
            lambda,
            direct,
            formula: None,
            residual: None,
            not_applicable: Some(reason),
        });
    }
    let formula = sum_curvature(&model.b1, &scaled_b2, z)?.curvature;
    let residual = formula.relative_distance(&direct);
    Ok(RLambda {
        lambda,
        direct,
        formula: Some(formula),
        residual: Some(residual),
        not_applicable: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QLimitRecord {
    pub lambdas: Vec<f64>,
    /// `‖q_λ - q_∞‖`
    pub errors: Vec<f64>,
    pub error_ratios: Vec<f64>,
    /// `e^{-Δλ}` for consecutive grid entries.
    pub expected_ratios: Vec<f64>,
    #[serde(with = "crate::json::cmat")]
    pub q_infinity: CMat,
    /// `‖q_∞ - (j j†)* b₁‖`
    pub projection_residual: f64,
    pub semipositive: bool,
    /// Smallest eigenvalue of `q_∞` on the fiber directions.
    pub vertical_min_eigenvalue: f64,
    pub positive_on_vertical: bool,
}

/// `q_λ` for the pointwise forms `b₁(z)`, `e^λ b₂(z)` and its limit.
pub fn q_lambda_limit(model: &FibrationModel, z: &[C64], lambda_grid: &[f64]) -> Result<QLimitRecord> {
    let tol = model.b1.rank_tol();
    let b1 = HermitianForm::with_tol(model.b1.gram(z)?, tol)?;
    let b2 = HermitianForm::with_tol(model.b2.gram(z)?, tol)?;
    let lf = limit_form(&b1, &b2, lambda_grid)?;
    let q_inf = lf.q_infinity.gram().clone();
    let (eigs, _) = herm_eig(&q_inf);
    let scale = 1.0 + fro(&q_inf);
    let semipositive = eigs.iter().all(|&e| e >= -1e-10 * scale);
    let vertical_min_eigenvalue = herm_eig(&model.vertical_block(&q_inf)).0[0];
    Ok(QLimitRecord {
        lambdas: lf.lambdas.clone(),
        errors: lf.errors.clone(),
        error_ratios: lf.error_ratios(),
        expected_ratios: lambda_grid.windows(2).map(|w| (w[0] - w[1]).exp()).collect(),
        projection_residual: lf.projection_residual(),
        q_infinity: q_inf,
        semipositive,
        vertical_min_eigenvalue,
        positive_on_vertical: vertical_min_eigenvalue > 1e-10 * scale,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerticalHscRecord {
    #[serde(with = "crate::json::cvec")]
    pub point: Vec<C64>,
    #[serde(with = "crate::json::cvec")]
    pub direction: Vec<C64>,
    pub lambda: f64,
    pub h: f64,
    pub h_fiber: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerticalHscReport {
    pub records: Vec<VerticalHscRecord>,
    pub min_h: f64,
    /// `max |H_{h_λ}(v) - H_fiber(v)|` at each tested λ.
    pub max_deviation_by_lambda: Vec<(f64, f64)>,
    /// Set when some vertical `H` is not above `margin`.
    pub flagged: bool,
    pub margin: f64,
}

/// `H_{h_λ}` on vertical directions against the fiber metric's own `H`.
pub fn vertical_hsc_check(
    model: &FibrationModel,
    z_grid: &[Vec<C64>],
    lambdas: &[f64],
    directions_per_point: usize,
    seed: u64,
) -> Result<VerticalHscReport> {
    let margin = 1e-6;
    let m = model.chart_dim();
    let fields = lambdas
        .iter()
        .map(|&l| h_lambda(model, l))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for (i, z) in z_grid.iter().enumerate() {
        let fiber = model.fiber_field(z)?;
        let fz: Vec<C64> = model.fiber_coords().iter().map(|&a| z[a]).collect();
        let fiber_curv = curvature_tensor(&fiber, &fz)?;
        let mut rng = sample_rng(seed, i as u64);
        for _ in 0..directions_per_point.max(1) {
            let u = sphere_direction(&mut rng, model.fiber_dim);
            let mut v = vec![C64::new(0.0, 0.0); m];
            v[model.base_dim..].copy_from_slice(&u);
            let h_fiber = hsc_from_curvature(&fiber_curv, &u)?;
            for (l, f) in lambdas.iter().zip(&fields) {
                records.push(VerticalHscRecord {
                    point: z.clone(),
                    direction: v.clone(),
                    lambda: *l,
                    h: hsc(f, z, &v)?,
                    h_fiber,
                });
            }
        }
    }
    let min_h = records.iter().map(|r| r.h).fold(f64::INFINITY, f64::min);
    let max_deviation_by_lambda = lambdas
        .iter()
        .map(|&l| {
            let dev = records
                .iter()
                .filter(|r| r.lambda == l)
                .map(|r| (r.h - r.h_fiber).abs())
                .fold(0.0, f64::max);
            (l, dev)
        })
        .collect();
    Ok(VerticalHscReport {
        flagged: !(min_h > margin),
        records,
        min_h,
        max_deviation_by_lambda,
        margin,
    })
}

#[derive(Debug, Clone)]
pub struct LambdaScanOptions {
    pub schedule: Vec<f64>,
    pub margin: f64,
    pub samples: usize,
    pub refinement_steps: usize,
    pub refine_starts: usize,
    /// Points on which positive-definiteness of `h_λ` is checked.
    pub grid_points: usize,
    pub seed: u64,
    pub exec: Exec,
    /// Skip the doubled-sample rerun at `λ₀`.
    pub skip_stability: bool,
}

impl Default for LambdaScanOptions {
    fn default() -> Self {
        Self {
            schedule: (0..=12).map(f64::from).collect(),
            margin: 1e-3,
            samples: 2000,
            refinement_steps: 200,
            refine_starts: 4,
            grid_points: 25,
            seed: 0,
            exec: Exec::Auto,
            skip_stability: false,
        }
    }
}

impl LambdaScanOptions {
    fn scan(&self, samples: usize) -> ScanOptions {
        ScanOptions {
            samples,
            refinement_steps: self.refinement_steps,
            refine_starts: self.refine_starts,
            seed: self.seed,
            exec: self.exec,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaRecord {
    pub lambda: f64,
    pub positive_definite: bool,
    /// Smallest eigenvalue of `h_λ` over the check grid.
    pub min_eigenvalue: f64,
    /// Minimum sampled-and-refined `H`; absent when `h_λ` is not positive.
    pub min_h: Option<f64>,
    pub argmin: Option<HscSample>,
    pub samples: usize,
}

impl LambdaRecord {
    fn passes(&self, margin: f64) -> bool {
        self.positive_definite && self.min_h.is_some_and(|h| h > margin)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaScanResult {
    pub model: String,
    /// First passing `λ` after the bisection pass; `None` when the schedule is exhausted.
    pub lambda0: Option<f64>,
    pub records: Vec<LambdaRecord>,
    pub bisection: Option<LambdaRecord>,
    /// Rerun at `λ₀` with twice the samples.
    pub stability: Option<LambdaRecord>,
    /// `min H > 0` for every scheduled `λ ≥ λ₀` and in the stability rerun.
    pub positive_beyond_lambda0: bool,
    pub margin: f64,
    pub seed: u64,
    pub samples: usize,
    pub refinement_steps: usize,
    pub region: Domain,
}

fn evaluate_lambda(model: &FibrationModel, lambda: f64, grid: &[Vec<C64>], opts: &LambdaScanOptions, samples: usize) -> Result<LambdaRecord> {
    let field = h_lambda(model, lambda)?;
    let mut min_eig = f64::INFINITY;
    for z in grid {
        min_eig = min_eig.min(min_eigenvalue(&field, z)?);
    }
    let positive_definite = min_eig > field.rank_tol();
    let (min_h, argmin) = if positive_definite {
        let scan = hsc_extremes(&field, &model.region, &opts.scan(samples))?;
        (Some(scan.min_h), Some(scan.argmin))
    } else {
        (None, None)
    };
    Ok(LambdaRecord {
        lambda,
        positive_definite,
        min_eigenvalue: min_eig,
        min_h,
        argmin,
        samples,
    })
}

/// Scans the schedule for the first `λ` at which `h_λ` is positive on the
/// grid and the minimum of `H` over the region exceeds the margin, then
/// bisects once towards the previous schedule entry and reruns at `λ₀` with
/// doubled samples.
pub fn find_lambda0(model: &FibrationModel, opts: &LambdaScanOptions) -> Result<LambdaScanResult> {
    let mut grid = vec![model.region.center.clone()];
    grid.extend(region_points(&model.region, opts.grid_points, opts.seed ^ 0x9e37));
    let records = opts
        .schedule
        .iter()
        .map(|&l| evaluate_lambda(model, l, &grid, opts, opts.samples))
        .collect::<Result<Vec<_>>>()?;
    let first = records.iter().position(|r| r.passes(opts.margin));
    let mut lambda0 = first.map(|i| records[i].lambda);
    let mut bisection = None;
    if let Some(i) = first.filter(|&i| i > 0) {
        let mid = 0.5 * (records[i - 1].lambda + records[i].lambda);
        let rec = evaluate_lambda(model, mid, &grid, opts, opts.samples)?;
        if rec.passes(opts.margin) {
            lambda0 = Some(mid);
        }
        bisection = Some(rec);
    }
    let stability = match (lambda0, opts.skip_stability) {
        (Some(l), false) => Some(evaluate_lambda(model, l, &grid, opts, 2 * opts.samples)?),
        _ => None,
    };
    let positive_beyond_lambda0 = lambda0.is_some_and(|l0| {
        records
            .iter()
            .filter(|r| r.lambda >= l0)
            .all(|r| r.positive_definite && r.min_h.is_some_and(|h| h > 0.0))
            && stability
                .as_ref()
                .is_none_or(|s| s.positive_definite && s.min_h.is_some_and(|h| h > 0.0))
    });
    Ok(LambdaScanResult {
        model: model.label.clone(),
        lambda0,
        records,
        bisection,
        stability,
        positive_beyond_lambda0,
        margin: opts.margin,
        seed: opts.seed,
        samples: opts.samples,
        refinement_steps: opts.refinement_steps,
        region: model.region.clone(),
    })
}

/// Builds a model whose fiber form is negated; always rejected by validation.
pub fn with_negated_fiber(model: &FibrationModel) -> Result<FibrationModel> {
    let b1 = weighted_sum_field(&[(-1.0, &model.b1)])?;
    FibrationModel::new(
        format!("{}-negated", model.label),
        model.base_dim,
        model.fiber_dim,
        b1,
        model.b2.clone(),
        model.region.clone(),
    )
}

/// Model with `b₂ = 0`.
pub fn with_zero_base(model: &FibrationModel) -> Result<FibrationModel> {
    let b2 = weighted_sum_field(&[(0.0, &model.b2)])?;
    FibrationModel::new(
        format!("{}-nobase", model.label),
        model.base_dim,
        model.fiber_dim,
        model.b1.clone(),
        b2,
        model.region.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart_calc::torsion_defect;
    use crate::linalg::{c, cr, eye};
    use crate::models::{fubini_study_chart, hirzebruch_model, product_model};

    fn fs_product() -> FibrationModel {
        let fs = fubini_study_chart(1).unwrap();
        product_model(&fs, &fs).unwrap()
    }

    #[test]
    fn product_model_basics() {
        let p = fs_product();
        let z0 = [cr(0.0), cr(0.0)];
        assert!(fro(&(h_lambda(&p, 0.0).unwrap().gram(&z0).unwrap() - eye(2))) < 1e-14);
        let g1 = p.b1.gram(&[c(0.3, 0.1), c(-0.2, 0.2)]).unwrap();
        assert!(fro(&g1.columns(0, 1).into_owned()) < 1e-14);
        let l = h_lambda(&p, -40.0).unwrap();
        assert!(min_eigenvalue(&l, &z0).unwrap() < 1e-12);
    }

    #[test]
    fn negated_fiber_rejected() {
        assert!(matches!(with_negated_fiber(&fs_product()), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn hirzebruch_zero_twist_is_product() {
        let h0 = hirzebruch_model(0).unwrap();
        let p = fs_product();
        for z in region_points(&p.region, 10, 1) {
            for (a, b) in [(&h0.b1, &p.b1), (&h0.b2, &p.b2)] {
                assert!(fro(&(a.gram(&z).unwrap() - b.gram(&z).unwrap())) < 1e-12);
            }
        }
    }

    #[test]
    fn hirzebruch_positive_at_lambda_two() {
        let h = hirzebruch_model(1).unwrap();
        let f = h_lambda(&h, 2.0).unwrap();
        assert!(min_eigenvalue(&f, &[cr(0.0), cr(0.0)]).unwrap() > 0.0);
    }

    #[test]
    fn decomposition_matches_direct() {
        let p = fs_product();
        for l in [0.0, 1.5, 4.0] {
            let r = r_lambda_decomposed(&p, l, &[c(0.2, 0.1), c(-0.3, 0.05)]).unwrap();
            assert!(r.residual.unwrap() < 1e-4, "{l}: {:?}", r.residual);
        }
        let nb = with_zero_base(&p).unwrap();
        let r = r_lambda_decomposed(&nb.clone(), 1.0, &[c(0.2, 0.1), c(-0.3, 0.05)]);
        // b₁ alone is degenerate, so h_λ is not positive.
        assert!(matches!(r, Err(Error::NotPositive { .. })));
        let h = hirzebruch_model(1).unwrap();
        let r = r_lambda_decomposed(&h, 1.0, &[c(0.2, 0.1), c(0.3, -0.2)]).unwrap();
        assert!(r.residual.unwrap() < 1e-4, "{:?}", r.residual);
        let r = r_lambda_decomposed(&h, 1.0, &[c(0.2, 0.1), cr(0.0)]).unwrap();
        assert!(r.not_applicable.is_some());
    }

    #[test]
    fn limit_form_on_models() {
        let p = fs_product();
        let rec = q_lambda_limit(&p, &[cr(0.0), cr(0.0)], &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!(fro(&rec.q_infinity) < 1e-12);
        assert!(rec.projection_residual < 1e-8);
        let h = hirzebruch_model(1).unwrap();
        let rec = q_lambda_limit(&h, &[c(0.3, 0.1), c(0.4, -0.2)], &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!(rec.semipositive);
        assert!(rec.projection_residual < 1e-8, "{}", rec.projection_residual);
        for (r, e) in rec.error_ratios.iter().zip(&rec.expected_ratios) {
            assert!((r / e - 1.0).abs() < 0.2, "{r} vs {e}");
        }
    }

    #[test]
    fn vertical_curvature() {
        let p = fs_product();
        let grid = region_points(&p.region, 4, 3);
        let rep = vertical_hsc_check(&p, &grid, &[0.0, 2.0, 5.0], 2, 1).unwrap();
        assert!(rep.records.iter().all(|r| (r.h - 2.0).abs() < 1e-4));
        assert!(!rep.flagged);
    }

    #[test]
    fn kahler_preserved() {
        let h = hirzebruch_model(1).unwrap();
        let f = h_lambda(&h, 3.0).unwrap();
        let t = torsion_defect(&f, &[c(0.2, 0.1), c(0.3, -0.1)]).unwrap();
        assert!(t.defect < 1e-6);
    }

    #[test]
    fn product_lambda0_small_scan() {
        let p = fs_product();
        let opts = LambdaScanOptions {
            schedule: vec![0.0, 1.0],
            samples: 100,
            refinement_steps: 30,
            ..Default::default()
        };
        let res = find_lambda0(&p, &opts).unwrap();
        assert_eq!(res.lambda0, Some(0.0));
        assert!(res.positive_beyond_lambda0);
    }
}
