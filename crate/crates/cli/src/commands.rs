//! One function per command; each returns the report records.

use serde_json::{json, Value};

use hermitia::acceptance::{
    demailly_suite, instance_point, random_adjointable, random_semidefinite, run_all, sum_instance,
    AcceptanceOptions,
};
use hermitia::chart_calc::{
    curvature_tensor, hsc, torsion_defect, ChartField, DerivativeMode, Domain,
};
use hermitia::fibration::{find_lambda0, h_lambda, LambdaScanOptions};
use hermitia::herm_core::{
    adjoint_freedom_dims, adjoint_identity_residual, adjoint_matrix, kernel, purge, HermitianForm,
    LinearMap,
};
use hermitia::json::{matrix_to_value, vector_to_value};
use hermitia::linalg::{c, cr, fro, herm_eig, zeros, CMat, C64};
use hermitia::models::{
    einstein_residual, grassmannian_chart, hsc_extremes, model_by_id, pluecker_pullback,
    region_points, Model, ScanOptions,
};
use hermitia::par::Exec;
use hermitia::sampling::sample_rng;
use hermitia::sequences::{random_sequence, sum_check, tautological_line};
use rand::Rng;

use crate::config::{Command, Demo, Derivatives, RunConfig};
use crate::report::Record;
use crate::{say, CliError};

type Records = Result<Vec<Record>, CliError>;

pub fn dispatch(cfg: &RunConfig) -> Records {
    match cfg.command {
        Command::Purge => purge_cmd(cfg),
        Command::Adjoint => adjoint_cmd(cfg),
        Command::Curvature => curvature_cmd(cfg),
        Command::Hsc => hsc_cmd(cfg),
        Command::Grassmannian => grassmannian_cmd(cfg),
        Command::CodazziCheck => codazzi_cmd(cfg),
        Command::DemaillyCheck => demailly_cmd(cfg),
        Command::SumCheck => sum_cmd(cfg),
        Command::FibrationScan => fibration_cmd(cfg),
        Command::Acceptance => acceptance_cmd(cfg),
    }
}

fn exec(cfg: &RunConfig) -> Exec {
    if cfg.threads == Some(1) {
        Exec::Sequential
    } else {
        Exec::Auto
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

/// Parses `1`, `-0.5i`, `0.1+0.2i`, `3e-2-1e-1i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse().ok().map(cr);
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(c(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(c(0.0, imag(body)?)),
    }
}

pub fn parse_vector(s: &str) -> Option<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

fn vector_arg(raw: &Option<String>, name: &str, len: usize) -> Result<Option<Vec<C64>>, CliError> {
    let Some(text) = raw else { return Ok(None) };
    let v = parse_vector(text)
        .ok_or_else(|| CliError::Config(format!("--{name}: cannot parse `{text}`")))?;
    if v.len() != len {
        return Err(CliError::Config(format!(
            "--{name} needs {len} entries, got {}",
            v.len()
        )));
    }
    Ok(Some(v))
}

fn apply_mode(field: ChartField, cfg: &RunConfig) -> ChartField {
    match (cfg.derivatives, DerivativeMode::fd()) {
        (Derivatives::Fd, DerivativeMode::FiniteDifference { step, outer_step }) => {
            field.with_fd(step, outer_step)
        }
        _ => field,
    }
}

/// The metric a pointwise command operates on, with its scan region and
/// known HSC bounds. Fibration models use `b1 + e^λ b2` at `--lambda`.
struct Target {
    id: String,
    field: ChartField,
    region: Domain,
    bounds: Option<(f64, f64)>,
}

fn target(cfg: &RunConfig, default_id: &str) -> Result<Target, CliError> {
    let id = cfg.model.clone().unwrap_or_else(|| default_id.to_string());
    let (field, region, bounds) = match model_by_id(&id)? {
        Model::Metric(m) => (m.field, m.region, m.hsc_bounds),
        Model::Fibration(f) => {
            let lambda = cfg.lambda.unwrap_or(0.0);
            (h_lambda(&f, lambda)?, f.region.clone(), None)
        }
    };
    let region = match cfg.region {
        Some(r) if r > 0.0 => Domain::new(region.center, r),
        Some(r) => {
            return Err(CliError::Config(format!(
                "--region must be positive, got {r}"
            )))
        }
        None => region,
    };
    Ok(Target {
        id,
        field: apply_mode(field, cfg),
        region,
        bounds,
    })
}

fn degenerate_demo(dv: usize, dw: usize) -> (HermitianForm, HermitianForm, CMat) {
    let mut d = vec![1.0; dv];
    d[dv - 1] = 0.0;
    let bv = HermitianForm::from_real_diag(&d);
    let bw = HermitianForm::identity(dw);
    let mut f = zeros(dw, dv);
    for i in 0..dw.min(dv - 1) {
        f[(i, i)] = cr(1.0);
    }
    (bv, bw, f)
}

fn dims(cfg: &RunConfig) -> Result<(usize, usize), CliError> {
    let dv = cfg.dim_v.unwrap_or(2);
    let dw = cfg.dim_w.unwrap_or(1);
    if dv == 0 || dw == 0 {
        return Err(CliError::Config(
            "--dimV and --dimW must be at least 1".into(),
        ));
    }
    Ok((dv, dw))
}

/// Prints a column vector as `(a; b)` and a matrix row by row.
pub fn format_matrix(m: &CMat) -> String {
    let fmt = |z: C64| {
        let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
        let (re, im) = (clean(z.re), clean(z.im));
        if im == 0.0 {
            format!("{re}")
        } else {
            format!("{re}{:+}i", im)
        }
    };
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| fmt(m[(i, j)]))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    format!("({})", rows.join("; "))
}

fn purge_cmd(cfg: &RunConfig) -> Records {
    let (dv, _) = dims(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let b = match cfg.demo.unwrap_or(Demo::Random) {
        Demo::Degenerate => degenerate_demo(dv, 1).0,
        Demo::Random => {
            let mut rng = sample_rng(cfg.seed, 0);
            let rank = rng.random_range(1..=dv);
            random_semidefinite(&mut rng, dv, rank)
        }
    };
    let p = purge(&b);
    let q = &p.quotient_map.matrix;
    let rebuilt = q.adjoint() * p.purged_form.gram() * q;
    let factor = fro(&(rebuilt - b.gram())) / fro(b.gram()).max(1.0);
    let min_eig = herm_eig(p.purged_form.gram()).0.first().copied();
    say(&format!("purged form = {}", format_matrix(p.purged_form.gram())));
    Ok(vec![
        Record::info("gram", matrix_to_value(b.gram())),
        Record::info("rank", json!(b.rank())),
        Record::info("kernel_dim", json!(kernel(&b).dim())),
        Record::info("purged_gram", matrix_to_value(p.purged_form.gram())),
        Record::verdict(
            "purged_positive_definite",
            json!(min_eig),
            min_eig.is_none_or(|e| e > 0.0),
        ),
        Record::check(
            "factorization_b_eq_qstar_bhat_q",
            json!(factor),
            factor,
            tol,
        ),
    ])
}

fn adjoint_cmd(cfg: &RunConfig) -> Records {
    let (dv, dw) = dims(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-8);
    let (bv, bw, f) = match cfg.demo.unwrap_or(Demo::Random) {
        Demo::Degenerate => degenerate_demo(dv, dw),
        Demo::Random => {
            let mut rng = sample_rng(cfg.seed, 0);
            let (rv, rw) = (rng.random_range(0..=dv), rng.random_range(0..=dw));
            let bv = random_semidefinite(&mut rng, dv, rv);
            let bw = random_semidefinite(&mut rng, dw, rw);
            let f = random_adjointable(&mut rng, &bv, &bw);
            (bv, bw, f)
        }
    };
    let f_dag = adjoint_matrix(&f, &bv, &bw)?;
    let f_dag_dag = adjoint_matrix(&f_dag, &bw, &bv)?;
    let scale = fro(&f).max(1.0);
    let identity = adjoint_identity_residual(&f, &f_dag, &bv, &bw) / scale;
    let double = fro(&(bw.gram() * (&f_dag_dag - &f))) / scale;
    let freedom = adjoint_freedom_dims(&LinearMap::new(f.clone()), &bv, &bw);
    let torsor = freedom.torsor_dim.unwrap_or(0);
    say(&format!("f† = {}", format_matrix(&f_dag)));
    say(&format!("torsor dim {torsor}"));
    Ok(vec![
        Record::info("f", matrix_to_value(&f)),
        Record::info("f_dagger", matrix_to_value(&f_dag)),
        Record::verdict(
            "torsor_dim",
            json!(freedom.torsor_dim),
            freedom.torsor_dim.is_some(),
        ),
        Record::info("adjointable_codim", json!(freedom.adjointable_codim)),
        Record::check("adjoint_identity", json!(identity), identity, tol),
        Record::check("double_adjoint", json!(double), double, tol),
    ])
}

fn curvature_cmd(cfg: &RunConfig) -> Records {
    let t = target(cfg, "fs:1")?;
    let m = t.field.chart_dim();
    let tol = cfg.tol.unwrap_or(1e-8);
    let z = vector_arg(&cfg.point, "point", m)?.unwrap_or_else(|| t.region.center.clone());
    let curv = curvature_tensor(&t.field, &z)?;
    let blocks: Vec<Vec<Value>> = curv
        .blocks
        .iter()
        .map(|row| row.iter().map(matrix_to_value).collect())
        .collect();
    let mut recs = vec![
        Record::info("model", json!(t.id)),
        Record::info("point", vector_to_value(&z)),
        Record::info("blocks", json!(blocks)),
        Record::info("norm", json!(curv.norm())),
        Record::check(
            "pair_symmetry",
            json!(curv.pair_symmetry_residual()),
            curv.pair_symmetry_residual() / curv.norm().max(1.0),
            tol,
        ),
    ];
    if t.field.mode().is_analytic() {
        let fd = ChartField::new(t.field.source().clone(), t.field.domain().clone());
        let rel = curv.relative_distance(&curvature_tensor(&fd, &z)?);
        recs.push(Record::check("analytic_vs_fd", json!(rel), rel, 1e-4));
    }
    if t.field.frame_rank() == m {
        let tor = torsion_defect(&t.field, &z)?;
        recs.push(Record::check(
            "kahler_torsion",
            to_value(&tor),
            tor.defect,
            1e-6,
        ));
        if let Some(v) = vector_arg(&cfg.direction, "direction", m)? {
            recs.push(Record::info("hsc", json!(hsc(&t.field, &z, &v)?)));
        }
    }
    Ok(recs)
}

fn hsc_cmd(cfg: &RunConfig) -> Records {
    let t = target(cfg, "fs:1")?;
    let tol = cfg.tol.unwrap_or(1e-5);
    let opts = ScanOptions {
        samples: cfg.samples.unwrap_or(2000),
        seed: cfg.seed,
        exec: exec(cfg),
        ..Default::default()
    };
    let scan = hsc_extremes(&t.field, &t.region, &opts)?;
    let mut recs = vec![
        Record::info("model", json!(t.id)),
        Record::info("seed", json!(cfg.seed)),
    ];
    match t.bounds {
        Some((lo, hi)) => {
            recs.push(Record::check(
                "min_h",
                json!(scan.min_h),
                (scan.min_h - lo).abs(),
                tol,
            ));
            recs.push(Record::check(
                "max_h",
                json!(scan.max_h),
                (scan.max_h - hi).abs(),
                tol,
            ));
        }
        None => {
            recs.push(Record::info("min_h", json!(scan.min_h)));
            recs.push(Record::info("max_h", json!(scan.max_h)));
        }
    }
    recs.push(Record::info("sampled_min", json!(scan.sampled_min)));
    recs.push(Record::info("sampled_max", json!(scan.sampled_max)));
    recs.push(Record::info("argmin", to_value(&scan.argmin)));
    recs.push(Record::info("argmax", to_value(&scan.argmax)));
    Ok(recs)
}

fn grassmannian_cmd(cfg: &RunConfig) -> Records {
    let id = cfg.model.clone().unwrap_or_else(|| "gr:2:4".into());
    let (k, n) = match id.split(':').collect::<Vec<_>>().as_slice() {
        ["gr" | "pl", k, n] => (
            k.parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad model `{id}`")))?,
            n.parse::<usize>()
                .map_err(|_| CliError::Config(format!("bad model `{id}`")))?,
        ),
        _ => {
            return Err(CliError::Config(format!(
                "grassmannian needs a gr:K:N model, got `{id}`"
            )))
        }
    };
    let hom = grassmannian_chart(k, n)?;
    let pl = pluecker_pullback(k, n)?;
    let field = apply_mode(hom.field.clone(), cfg);
    let m = field.chart_dim();
    let region = Domain::origin(m, cfg.region.unwrap_or(hom.field.domain().radius * 0.7));
    let kk = k.min(n - k) as f64;
    let (lo, hi) = (2.0 / (kk * kk), 2.0);
    let tol = cfg.tol.unwrap_or(0.025);
    let scan = hsc_extremes(
        &field,
        &region,
        &ScanOptions {
            samples: cfg.samples.unwrap_or(2000),
            seed: cfg.seed,
            exec: exec(cfg),
            ..Default::default()
        },
    )?;
    let ein = einstein_residual(&field, n as f64, &region_points(&region, 10, cfg.seed))?;
    let mut two: f64 = 0.0;
    for z in region_points(&region, 20, cfg.seed ^ 0x9) {
        two = two.max(fro(&(hom.field.gram(&z)? - pl.gram(&z)?)));
    }
    Ok(vec![
        Record::info("model", json!(format!("gr:{k}:{n}"))),
        Record::check(
            "min_h_vs_2_over_k2",
            json!(scan.min_h),
            (scan.min_h - lo).abs(),
            tol,
        ),
        Record::check(
            "max_h_vs_2",
            json!(scan.max_h),
            (scan.max_h - hi).abs(),
            tol,
        ),
        Record::info("sampled_range", json!([scan.sampled_min, scan.sampled_max])),
        Record::check("einstein", json!(ein), ein, 1e-6),
        Record::check("hom_vs_pluecker", json!(two), two, 1e-8),
    ])
}

fn codazzi_cmd(cfg: &RunConfig) -> Records {
    let count = cfg.instances.unwrap_or(25);
    let tol = cfg.tol.unwrap_or(1e-4);
    let mut recs = Vec::new();
    for i in 0..count as u64 {
        let seq = random_sequence(cfg.seed, i)?;
        let z = instance_point(&seq, cfg.seed, i);
        let rep = seq.codazzi_check(&z)?;
        let worst = rep.sub_residual.max(rep.quot_residual);
        recs.push(Record::check(
            format!("instance_{i}"),
            to_value(&rep),
            worst,
            tol,
        ));
    }
    let taut = tautological_line()?;
    let (z0, one) = ([cr(0.0)], [cr(1.0)]);
    let rs = taut.codazzi_sub(&z0, 0, 0, &one, &one)?;
    let rq = taut.codazzi_quot(&z0, 0, 0, &one, &one)?;
    recs.push(Record::check(
        "tautological_R_S",
        json!(rs.re),
        (rs - cr(-1.0)).norm(),
        tol,
    ));
    recs.push(Record::check(
        "tautological_R_Q",
        json!(rq.re),
        (rq - cr(1.0)).norm(),
        tol,
    ));
    Ok(recs)
}

fn demailly_cmd(cfg: &RunConfig) -> Records {
    let tol = cfg.tol.unwrap_or(1e-5);
    let suite = demailly_suite(cfg.seed, exec(cfg))?;
    let take = cfg.instances.unwrap_or(suite.len());
    Ok(suite
        .into_iter()
        .take(take)
        .map(|(name, lines)| {
            let worst = lines.iter().copied().fold(0.0, f64::max);
            Record::check(name, json!(lines), worst, tol)
        })
        .collect())
}

fn sum_cmd(cfg: &RunConfig) -> Records {
    let count = cfg.instances.unwrap_or(25);
    let tol = cfg.tol.unwrap_or(1e-4);
    let mut recs = Vec::new();
    for i in 0..count as u64 {
        let (b1, b2, z, kind) = sum_instance(cfg.seed, i)?;
        let r = sum_check(&b1, &b2, &z)?;
        recs.push(Record::check(format!("instance_{i}"), json!(kind), r, tol));
    }
    Ok(recs)
}

fn fibration_cmd(cfg: &RunConfig) -> Records {
    let id = cfg.model.clone().unwrap_or_else(|| "prod:fs1:fs1".into());
    let Model::Fibration(model) = model_by_id(&id)? else {
        return Err(CliError::Config(format!("`{id}` is not a fibration model")));
    };
    let lambda_max = cfg.lambda_max.unwrap_or(12.0);
    if !(lambda_max >= 0.0) {
        return Err(CliError::Config(format!(
            "--lambda-max must be non-negative, got {lambda_max}"
        )));
    }
    let mut model = model;
    model.b1 = apply_mode(model.b1, cfg);
    model.b2 = apply_mode(model.b2, cfg);
    if let Some(r) = cfg.region {
        model.region = Domain::new(model.region.center.clone(), r);
    }
    let mut schedule: Vec<f64> = (0..=lambda_max.floor() as usize)
        .map(|l| l as f64)
        .collect();
    if lambda_max.fract() > 0.0 {
        schedule.push(lambda_max);
    }
    let opts = LambdaScanOptions {
        schedule,
        samples: cfg.samples.unwrap_or(2000),
        seed: cfg.seed,
        exec: exec(cfg),
        ..Default::default()
    };
    let res = find_lambda0(&model, &opts)?;
    let mut recs = vec![Record::verdict(
        "lambda0",
        json!(res.lambda0),
        res.lambda0.is_some() && res.positive_beyond_lambda0,
    )];
    for r in &res.records {
        recs.push(Record::info(format!("lambda_{}", r.lambda), to_value(r)));
    }
    if let Some(s) = &res.stability {
        recs.push(Record::verdict(
            "stability_doubled_samples",
            to_value(s),
            s.min_h.is_some_and(|h| h > 0.0),
        ));
    }
    Ok(recs)
}

fn acceptance_cmd(cfg: &RunConfig) -> Records {
    let results = run_all(&AcceptanceOptions {
        seed: cfg.seed,
        exec: exec(cfg),
    });
    Ok(results
        .into_iter()
        .map(|r| {
            let value = json!({
                "id": r.id,
                "measured": r.measured,
                "tolerance": r.tolerance,
                "runtime_ms": r.runtime_ms,
                "details": r.details,
            });
            Record::verdict(format!("criterion_{}_{}", r.id, r.name), value, r.passed)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1.5"), Some(cr(1.5)));
        assert_eq!(parse_complex("-2i"), Some(c(0.0, -2.0)));
        assert_eq!(parse_complex("i"), Some(c(0.0, 1.0)));
        assert_eq!(parse_complex("0.1+0.2i"), Some(c(0.1, 0.2)));
        assert_eq!(parse_complex("-1e-2-3e+1i"), Some(c(-0.01, -30.0)));
        assert_eq!(parse_complex("x"), None);
        assert_eq!(parse_vector("0.1, 0.2-0.1i").unwrap().len(), 2);
    }

    #[test]
    fn degenerate_demo_adjoint() {
        let (bv, bw, f) = degenerate_demo(2, 1);
        let d = adjoint_matrix(&f, &bv, &bw).unwrap();
        assert_eq!(format_matrix(&d), "(1; 0)");
    }
}
