//! The acceptance suite: one function per criterion, each returning a
//! [`CriterionResult`] with the measured values and the tolerance applied.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chart_calc::{
    curvature_tensor, gauge_independence_residual, hsc, ChartField, Domain, KernelPerturbation,
};
use crate::error::Result;
use crate::fibration::{find_lambda0, q_lambda_limit, LambdaScanOptions};
use crate::herm_core::{
    adjoint_freedom_dims, adjoint_identity_residual, adjoint_matrix, admits_adjoint, decomposition_dims, kernel,
    quotient_form_checked, sum_quotient_gram, HermitianForm, LinearMap, Subspace,
};
use crate::linalg::{c, cr, eye, fro, CMat, C64};
use crate::models::{
    einstein_residual, fubini_study_chart, grassmannian_chart, hirzebruch_model, hsc_extremes, pluecker_pullback,
    product_model, region_points, ScanOptions, GR_REGION_RADIUS,
};
use crate::par::{self, Exec};
use crate::sampling::{polydisc_point, random_cmat, sample_rng};
use crate::sequences::{
    random_degenerate_field, random_positive_field, random_sequence, sum_check, tautological_line, ExactSeqChart,
    INSTANCE_RADIUS, INSTANCE_REGION,
};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    /// One-line summary of the measured quantities.
    pub measured: String,
    pub tolerance: String,
    pub runtime_ms: f64,
    pub details: Value,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2}. {} | {} | tol {} | {:.0} ms",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.runtime_ms
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AcceptanceOptions {
    pub seed: u64,
    pub exec: Exec,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self {
            seed: 20240601,
            exec: Exec::Auto,
        }
    }
}

struct Outcome {
    passed: bool,
    measured: String,
    tolerance: String,
    details: Value,
    runtime_limit_s: Option<f64>,
}

fn finish(id: u32, name: &str, start: Instant, out: Result<Outcome>) -> CriterionResult {
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok(o) => {
            let in_time = o.runtime_limit_s.is_none_or(|lim| runtime_ms <= lim * 1e3);
            let tolerance = match o.runtime_limit_s {
                Some(lim) => format!("{}; runtime < {lim} s", o.tolerance),
                None => o.tolerance,
            };
            CriterionResult {
                id,
                name: name.to_string(),
                passed: o.passed && in_time,
                measured: o.measured,
                tolerance,
                runtime_ms,
                details: o.details,
            }
        }
        Err(e) => CriterionResult {
            id,
            name: name.to_string(),
            passed: false,
            measured: format!("error: {e}"),
            tolerance: String::new(),
            runtime_ms,
            details: json!({ "error": e.to_string() }),
        },
    }
}

/// 25 points `r e^{iθ}` with `r ∈ {0, 0.225, ..., 0.9}` and five angles.
pub fn disc_grid(radius: f64) -> Vec<Vec<C64>> {
    (0..5)
        .flat_map(|i| (0..5).map(move |j| (i, j)))
        .map(|(i, j)| {
            let r = radius * i as f64 / 4.0;
            let t = 2.0 * PI * j as f64 / 5.0 + 0.3 * i as f64;
            vec![c(r * t.cos(), r * t.sin())]
        })
        .collect()
}

pub fn c1_fubini_study(_o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let analytic = fubini_study_chart(1)?;
        let fd = ChartField::new(analytic.source().clone(), analytic.domain().clone()).with_label("fs:1/fd");
        let grid = disc_grid(0.9);
        let dev = |f: &ChartField| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for z in &grid {
                worst = worst.max((hsc(f, z, &[cr(1.0)])? - 2.0).abs());
            }
            Ok(worst)
        };
        let (da, dfd) = (dev(&analytic)?, dev(&fd)?);
        Ok(Outcome {
            passed: da <= 1e-5 && dfd <= 1e-3,
            measured: format!("max|H-2| analytic {da:.2e}, fd {dfd:.2e} on 25 points"),
            tolerance: "1e-5 analytic, 1e-3 fd".into(),
            details: json!({ "analytic_max_dev": da, "fd_max_dev": dfd, "points": grid.len() }),
            runtime_limit_s: Some(1.0),
        })
    })();
    finish(1, "Fubini-Study calibration", start, out)
}

pub fn c2_grassmannian_bounds(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let gr = grassmannian_chart(2, 4)?;
        let region = Domain::origin(4, GR_REGION_RADIUS);
        let scan = hsc_extremes(
            &gr.field,
            &region,
            &ScanOptions {
                seed: o.seed,
                exec: o.exec,
                ..Default::default()
            },
        )?;
        let (lo, hi) = (0.5, 2.0);
        let min_ok = (scan.min_h - lo).abs() <= 0.025;
        let max_ok = (scan.max_h - hi).abs() <= 0.02;
        let inside = scan.sampled_min >= lo - 1e-3
            && scan.sampled_max <= hi + 1e-3
            && scan.min_h >= lo - 1e-3
            && scan.max_h <= hi + 1e-3;
        Ok(Outcome {
            passed: min_ok && max_ok && inside,
            measured: format!(
                "min H {:.5} (sampled {:.5}), max H {:.5} (sampled {:.5}); min {}, max {}, range {}",
                scan.min_h,
                scan.sampled_min,
                scan.max_h,
                scan.sampled_max,
                ok(min_ok),
                ok(max_ok),
                ok(inside)
            ),
            tolerance: "min 0.5±0.025, max 2±0.02, samples in [0.499, 2.001]".into(),
            details: serde_json::to_value(&scan).unwrap_or(Value::Null),
            runtime_limit_s: Some(30.0),
        })
    })();
    finish(2, "Grassmannian HSC bounds", start, out)
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "out"
    }
}

pub fn c3_einstein(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let cases: Vec<(&str, ChartField, f64, f64)> = vec![
            ("fs:1", fubini_study_chart(1)?, 2.0, 0.9),
            ("fs:2", fubini_study_chart(2)?, 3.0, 0.9),
            ("gr:2:4", grassmannian_chart(2, 4)?.field, 4.0, GR_REGION_RADIUS),
        ];
        let mut worst: f64 = 0.0;
        let mut details = serde_json::Map::new();
        for (i, (id, f, n, radius)) in cases.iter().enumerate() {
            let pts = region_points(&Domain::origin(f.chart_dim(), *radius), 10, o.seed + i as u64);
            let r = einstein_residual(f, *n, &pts)?;
            worst = worst.max(r);
            details.insert(id.to_string(), json!({ "n": n, "residual": r }));
        }
        Ok(Outcome {
            passed: worst <= 1e-6,
            measured: format!("max |Ric - nG|/|G| = {worst:.2e}"),
            tolerance: "1e-6".into(),
            details: Value::Object(details),
            runtime_limit_s: None,
        })
    })();
    finish(3, "Einstein check", start, out)
}

pub fn c4_two_constructions(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let hom = grassmannian_chart(2, 4)?;
        let pl = pluecker_pullback(2, 4)?;
        let pts = region_points(&Domain::origin(4, GR_REGION_RADIUS), 20, o.seed);
        let mut worst: f64 = 0.0;
        for z in &pts {
            worst = worst.max(fro(&(hom.field.gram(z)? - pl.gram(z)?)));
        }
        Ok(Outcome {
            passed: worst <= 1e-8,
            measured: format!("max |G_hom - G_plucker| = {worst:.2e} at 20 points"),
            tolerance: "1e-8".into(),
            details: json!({ "max_difference": worst }),
            runtime_limit_s: None,
        })
    })();
    finish(4, "Two-constructions equality", start, out)
}

/// Seeded evaluation point for random sequence instance `i`.
pub fn instance_point(seq: &ExactSeqChart, seed: u64, i: u64) -> Vec<C64> {
    polydisc_point(&mut sample_rng(seed ^ 0xc0da, i), &vec![cr(0.0); seq.chart_dim()], INSTANCE_REGION)
}

pub fn c5_codazzi(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let results: Vec<Result<(f64, f64)>> = par::map_indexed(25, o.exec, |i| {
            let seq = random_sequence(o.seed, i as u64)?;
            let z = instance_point(&seq, o.seed, i as u64);
            let rep = seq.codazzi_check(&z)?;
            Ok((rep.sub_residual, rep.quot_residual))
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let taut = tautological_line()?;
        let z0 = [cr(0.0)];
        let one = [cr(1.0)];
        let rs = taut.codazzi_sub(&z0, 0, 0, &one, &one)?;
        let rq = taut.codazzi_quot(&z0, 0, 0, &one, &one)?;
        let rs_direct = curvature_tensor(taut.sub_field(), &z0)?.blocks[0][0][(0, 0)];
        let rq_direct = curvature_tensor(taut.quotient_field(), &z0)?.blocks[0][0][(0, 0)];
        let closed = (rs - cr(-1.0)).norm().max((rq - cr(1.0)).norm());
        let closed_direct = (rs_direct - cr(-1.0)).norm().max((rq_direct - cr(1.0)).norm());
        let worst = results.iter().map(|(a, b)| a.max(*b)).fold(0.0, f64::max);
        Ok(Outcome {
            passed: worst <= 1e-4 && closed <= 1e-4 && closed_direct <= 1e-4,
            measured: format!(
                "max rel residual {worst:.2e} over 25 instances; O(-1): R_S(0) {:.6}, R_Q(0) {:.6}",
                rs.re, rq.re
            ),
            tolerance: "1e-4 relative".into(),
            details: json!({
                "residuals": results,
                "tautological": { "R_S": rs.re, "R_Q": rq.re, "R_S_direct": rs_direct.re, "R_Q_direct": rq_direct.re },
            }),
            runtime_limit_s: None,
        })
    })();
    finish(5, "Codazzi-Griffiths oracle suite", start, out)
}

/// Summand pair for sum-of-forms instance `i`: both degenerate, mixed, or both positive.
pub fn sum_instance(seed: u64, i: u64) -> Result<(ChartField, ChartField, Vec<C64>, &'static str)> {
    let mut rng = sample_rng(seed ^ 0x5u64, i);
    let m = 1 + (i % 2) as usize;
    let r = 2 + (i % 3) as usize;
    let d = Domain::origin(m, INSTANCE_RADIUS);
    let (b1, b2, kind) = match i % 3 {
        0 => (
            random_degenerate_field(&mut rng, m, r, r - 1, d.clone())?,
            random_degenerate_field(&mut rng, m, r, r - 1, d.clone())?,
            "degenerate+degenerate",
        ),
        1 => (
            random_positive_field(&mut rng, m, r, d.clone())?,
            random_degenerate_field(&mut rng, m, r, 1, d.clone())?,
            "positive+degenerate",
        ),
        _ => (
            random_positive_field(&mut rng, m, r, d.clone())?,
            random_positive_field(&mut rng, m, r, d.clone())?,
            "positive+positive",
        ),
    };
    let z = polydisc_point(&mut rng, &d.center, INSTANCE_REGION);
    Ok((b1, b2, z, kind))
}

pub fn c6_sum_of_forms(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let results: Vec<Result<(f64, &'static str)>> = par::map_indexed(25, o.exec, |i| {
            let (b1, b2, z, kind) = sum_instance(o.seed, i as u64)?;
            Ok((sum_check(&b1, &b2, &z)?, kind))
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
        Ok(Outcome {
            passed: worst <= 1e-4,
            measured: format!("max rel residual {worst:.2e} over 25 instances"),
            tolerance: "1e-4 relative".into(),
            details: json!({ "residuals": results }),
            runtime_limit_s: None,
        })
    })();
    finish(6, "Sum-of-forms oracle suite", start, out)
}

pub fn c7_gauge(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let results: Vec<Result<f64>> = par::map_indexed(20, o.exec, |i| {
            let mut rng = sample_rng(o.seed ^ 0x7, i as u64);
            let m = 1 + i % 2;
            let r = 2 + i % 3;
            let d = Domain::origin(m, INSTANCE_RADIUS);
            let f = random_degenerate_field(&mut rng, m, r, r - 1, d.clone())?;
            let z = polydisc_point(&mut rng, &d.center, INSTANCE_REGION);
            let k = KernelPerturbation::random(&mut rng, m, r, &z);
            gauge_independence_residual(&f, &z, &k)
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let worst = results.iter().copied().fold(0.0, f64::max);
        Ok(Outcome {
            passed: worst <= 1e-6,
            measured: format!("max residual {worst:.2e} over 20 perturbations"),
            tolerance: "1e-6".into(),
            details: json!({ "residuals": results }),
            runtime_limit_s: None,
        })
    })();
    finish(7, "Gauge independence", start, out)
}

/// The identity-table suite: the split constant sequence, the tautological
/// line off the center, and ten random instances.
pub fn demailly_suite(seed: u64, exec: Exec) -> Result<Vec<(String, [f64; 5])>> {
    let mut out = Vec::new();
    let split = {
        let amb = ChartField::from_source(
            crate::chart_calc::fields::ConstantSource::new(crate::linalg::from_real_diag(&[2.0, 3.0, 1.5]), 2),
            Domain::origin(2, 1.0),
        )
        .analytic()?;
        ExactSeqChart::with_constant_inclusion(amb, CMat::from_fn(3, 1, |i, _| cr(if i == 0 { 1.0 } else { 0.0 })))?
    };
    out.push(("split".to_string(), split.demailly_residuals(&[c(0.1, 0.2), c(-0.1, 0.0)])?.lines));
    out.push(("tautological".to_string(), tautological_line()?.demailly_residuals(&[c(0.3, 0.1)])?.lines));
    let random: Vec<Result<(String, [f64; 5])>> = par::map_indexed(10, exec, |i| {
        let seq = random_sequence(seed ^ 0xde, i as u64)?;
        let z = instance_point(&seq, seed, i as u64);
        Ok((format!("random-{i}"), seq.demailly_residuals(&z)?.lines))
    });
    for r in random {
        out.push(r?);
    }
    Ok(out)
}

pub fn c8_demailly(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let suite = demailly_suite(o.seed, o.exec)?;
        let mut per_line = [0.0f64; 5];
        for (_, lines) in &suite {
            for (w, l) in per_line.iter_mut().zip(lines) {
                *w = w.max(*l);
            }
        }
        let worst = per_line.iter().copied().fold(0.0, f64::max);
        Ok(Outcome {
            passed: worst <= 1e-5,
            measured: format!(
                "per-line max [{}] over {} instances",
                per_line.iter().map(|x| format!("{x:.1e}")).collect::<Vec<_>>().join(", "),
                suite.len()
            ),
            tolerance: "1e-5".into(),
            details: json!({ "per_line_max": per_line, "instances": suite }),
            runtime_limit_s: None,
        })
    })();
    finish(8, "Demailly identity table", start, out)
}

pub fn c9_limit_form(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let grid = [2.0, 4.0, 6.0, 8.0];
        let fs = fubini_study_chart(1)?;
        let models = [hirzebruch_model(1)?, product_model(&fs, &fs)?];
        let mut worst_ratio_dev: f64 = 0.0;
        let mut worst_proj: f64 = 0.0;
        let mut ratio_count = 0;
        let mut records = Vec::new();
        for (mi, model) in models.iter().enumerate() {
            for z in region_points(&model.region, 10, o.seed + mi as u64) {
                let rec = q_lambda_limit(model, &z, &grid)?;
                for (r, e) in rec.error_ratios.iter().zip(&rec.expected_ratios) {
                    worst_ratio_dev = worst_ratio_dev.max((r / e - 1.0).abs());
                    ratio_count += 1;
                }
                worst_proj = worst_proj.max(rec.projection_residual);
                records.push(json!({ "model": model.label, "record": rec }));
            }
        }
        Ok(Outcome {
            passed: worst_ratio_dev <= 0.2 && worst_proj <= 1e-8 && ratio_count > 0,
            measured: format!(
                "max |ratio/e^-2 - 1| {worst_ratio_dev:.3} over {ratio_count} ratios; max |q_inf - (jj^dag)*b1| {worst_proj:.2e}"
            ),
            tolerance: "ratio ±20%, projection 1e-8".into(),
            details: json!({ "records": records }),
            runtime_limit_s: None,
        })
    })();
    finish(9, "Limit form", start, out)
}

pub fn c10_fibration(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let fs = fubini_study_chart(1)?;
        let models = [product_model(&fs, &fs)?, hirzebruch_model(1)?];
        let opts = LambdaScanOptions {
            seed: o.seed,
            exec: o.exec,
            ..Default::default()
        };
        let mut passed = true;
        let mut parts = Vec::new();
        let mut details = Vec::new();
        for model in &models {
            let res = find_lambda0(model, &opts)?;
            let good = res.lambda0.is_some() && res.positive_beyond_lambda0;
            passed &= good;
            parts.push(format!(
                "{}: lambda0 = {}, stable min H {}",
                model.label,
                res.lambda0.map_or("not found".into(), |l| format!("{l}")),
                res.stability
                    .as_ref()
                    .and_then(|s| s.min_h)
                    .map_or("-".into(), |h| format!("{h:.4}"))
            ));
            details.push(serde_json::to_value(&res).unwrap_or(Value::Null));
        }
        Ok(Outcome {
            passed,
            measured: parts.join("; "),
            tolerance: "finite lambda0, min H > 0 beyond it and under doubled samples".into(),
            details: Value::Array(details),
            runtime_limit_s: Some(120.0),
        })
    })();
    finish(10, "Fibration positivity", start, out)
}

/// Semidefinite form of the given rank on `C^n`.
pub fn random_semidefinite<R: Rng>(rng: &mut R, n: usize, rank: usize) -> HermitianForm {
    let f = random_cmat(rng, rank, n, 1.0);
    HermitianForm::new(f.adjoint() * f).expect("square")
}

/// Map `V → W` sending `Ker b_V` into `Ker b_W`.
pub fn random_adjointable<R: Rng>(rng: &mut R, bv: &HermitianForm, bw: &HermitianForm) -> CMat {
    let kv = kernel(bv).basis().clone();
    let kw = kernel(bw).basis().clone();
    let f0 = random_cmat(rng, bw.dim(), bv.dim(), 1.0);
    let pv = &kv * kv.adjoint();
    let mut f = &f0 * (eye(bv.dim()) - &pv);
    if kw.ncols() > 0 && kv.ncols() > 0 {
        let x = random_cmat(rng, kw.ncols(), kv.ncols(), 1.0);
        f += &kw * x * kv.adjoint();
    }
    f
}

/// Residuals of the linear-algebra invariants on one random instance.
#[derive(Debug, Clone, Copy, Serialize, Default)]
pub struct HermInstanceReport {
    pub adjoint_identity: f64,
    /// Adjoint identity for `f† + K_V Y`, plus `|G_V (f†₁ - f†₂)|` for two adjoints.
    pub torsor: f64,
    pub torsor_dims_ok: bool,
    /// `|G_W ((f†)† - f)|`
    pub double_adjoint: f64,
    pub decomposition_ok: bool,
    pub quotient_lift: f64,
    /// `|q K₁| + |q K₂|` for the sum quotient form and `|f K_V|` in `Ker b_W` terms.
    pub kernel_containment: f64,
    /// A map that does not preserve kernels must be rejected.
    pub rejects_non_adjointable: bool,
}

impl HermInstanceReport {
    pub const TOL: f64 = 1e-8;

    pub fn passed(&self) -> bool {
        self.adjoint_identity <= Self::TOL
            && self.torsor <= Self::TOL
            && self.torsor_dims_ok
            && self.double_adjoint <= Self::TOL
            && self.decomposition_ok
            && self.quotient_lift <= Self::TOL
            && self.kernel_containment <= Self::TOL
            && self.rejects_non_adjointable
    }
}

/// Runs every invariant on the instance drawn from `(seed, i)`.
pub fn herm_instance(seed: u64, i: u64) -> Result<HermInstanceReport> {
    let mut rng = sample_rng(seed, i);
    let dv = rng.random_range(1..=5usize);
    let dw = rng.random_range(1..=5usize);
    let (rv, rw) = (rng.random_range(0..=dv), rng.random_range(0..=dw));
    let bv = random_semidefinite(&mut rng, dv, rv);
    let bw = random_semidefinite(&mut rng, dw, rw);
    let scale = (1.0 + fro(bv.gram())) * (1.0 + fro(bw.gram()));
    let f = random_adjointable(&mut rng, &bv, &bw);
    let fs = 1.0 + fro(&f);
    let f_dag = adjoint_matrix(&f, &bv, &bw)?;
    let adjoint_identity = adjoint_identity_residual(&f, &f_dag, &bv, &bw) / (scale * fs);

    let kv = kernel(&bv).basis().clone();
    let alt = if kv.ncols() > 0 {
        &f_dag + &kv * random_cmat(&mut rng, kv.ncols(), dw, 1.0)
    } else {
        f_dag.clone()
    };
    let torsor = (adjoint_identity_residual(&f, &alt, &bv, &bw) + fro(&(bv.gram() * (&alt - &f_dag)))) / (scale * fs);
    let freedom = adjoint_freedom_dims(&LinearMap::new(f.clone()), &bv, &bw);
    let torsor_dims_ok =
        freedom.torsor_dim == Some(dw * kv.ncols()) && freedom.codim_by_rank == freedom.adjointable_codim;

    let f_dd = adjoint_matrix(&f_dag, &bw, &bv)?;
    let double_adjoint = fro(&(bw.gram() * (&f_dd - &f))) / (scale * fs);

    let ds = rng.random_range(0..=dv);
    let s = Subspace::span(&random_cmat(&mut rng, dv, ds, 1.0));
    let decomposition_ok = decomposition_dims(&s, &bv)?.holds();

    let p = rng.random_range(1..=dv);
    let q = random_cmat(&mut rng, p, dv, 1.0);
    let qf = quotient_form_checked(&q, &bv)?;
    let quotient_lift = qf.lift_discrepancy / (1.0 + fro(bv.gram()) * fro(&qf.lift).powi(2));

    let n = dv;
    let r1 = rng.random_range(0..=n);
    let b1 = random_semidefinite(&mut rng, n, r1);
    let b2 = random_semidefinite(&mut rng, n, n - r1);
    let qsum = sum_quotient_gram(b1.gram(), b2.gram(), 1e-10)?;
    let mut kernel_containment = [&b1, &b2]
        .iter()
        .map(|b| fro(&(&qsum * kernel(b).basis())))
        .sum::<f64>()
        / (1.0 + fro(&qsum));
    kernel_containment += fro(&(bw.gram() * &f * &kv)) / (scale * fs);

    let kw = kernel(&bw);
    let rejects_non_adjointable = if kv.ncols() > 0 && kw.dim() < dw {
        let bad = random_cmat(&mut rng, dw, dv, 1.0);
        !admits_adjoint(&LinearMap::new(bad.clone()), &bv, &bw) && adjoint_matrix(&bad, &bv, &bw).is_err()
    } else {
        true
    };

    Ok(HermInstanceReport {
        adjoint_identity,
        torsor,
        torsor_dims_ok,
        double_adjoint,
        decomposition_ok,
        quotient_lift,
        kernel_containment,
        rejects_non_adjointable,
    })
}

pub fn c11_herm_properties(o: &AcceptanceOptions) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let reports = (0..100)
            .map(|i| herm_instance(o.seed ^ 0x11, i))
            .collect::<Result<Vec<_>>>()?;
        let failures: Vec<usize> = reports.iter().enumerate().filter(|(_, r)| !r.passed()).map(|(i, _)| i).collect();
        let worst = |g: fn(&HermInstanceReport) -> f64| reports.iter().map(g).fold(0.0, f64::max);
        let summary = json!({
            "adjoint_identity": worst(|r| r.adjoint_identity),
            "torsor": worst(|r| r.torsor),
            "double_adjoint": worst(|r| r.double_adjoint),
            "quotient_lift": worst(|r| r.quotient_lift),
            "kernel_containment": worst(|r| r.kernel_containment),
        });
        Ok(Outcome {
            passed: failures.is_empty(),
            measured: format!("{} of 100 instances pass all invariants; worst {}", 100 - failures.len(), summary),
            tolerance: format!("{:.0e} relative", HermInstanceReport::TOL),
            details: json!({ "worst": summary, "failures": failures }),
            runtime_limit_s: Some(5.0),
        })
    })();
    finish(11, "Linear-algebra property suite", start, out)
}

pub fn criteria() -> Vec<(u32, fn(&AcceptanceOptions) -> CriterionResult)> {
    vec![
        (1, c1_fubini_study),
        (2, c2_grassmannian_bounds),
        (3, c3_einstein),
        (4, c4_two_constructions),
        (5, c5_codazzi),
        (6, c6_sum_of_forms),
        (7, c7_gauge),
        (8, c8_demailly),
        (9, c9_limit_form),
        (10, c10_fibration),
        (11, c11_herm_properties),
    ]
}

pub fn run_all(opts: &AcceptanceOptions) -> Vec<CriterionResult> {
    criteria().into_iter().map(|(_, f)| f(opts)).collect()
}
