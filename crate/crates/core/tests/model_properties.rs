//! Property tests for the model metrics.

use hermitia::chart_calc::{hsc, torsion_defect, Domain};
use hermitia::linalg::fro;
use hermitia::models::*;
use hermitia::fibration::h_lambda;
use hermitia::sampling::{polydisc_point, sample_rng, sphere_direction};
use hermitia::sequences::weighted_sum_field;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x30de1),
        ..ProptestConfig::default()
    }
}

fn metric(id: &str) -> MetricModel {
    match model_by_id(id).unwrap() {
        Model::Metric(m) => m,
        Model::Fibration(_) => panic!("{id} is a fibration"),
    }
}

const METRICS: [&str; 6] = ["fs:1", "fs:2", "gr:1:3", "gr:2:4", "gr:2:5", "pl:2:4"];

proptest! {
    #![proptest_config(config(10))]

    #[test]
    fn hsc_scales_inversely_with_the_metric(seed in any::<u64>(), which in 0usize..6, c in 0.2f64..5.0) {
        let m = metric(METRICS[which]);
        let scaled = weighted_sum_field(&[(c, &m.field)]).unwrap();
        let mut rng = sample_rng(seed, 0);
        let z = polydisc_point(&mut rng, &m.region.center, m.region.radius);
        let v = sphere_direction(&mut rng, m.field.chart_dim());
        let h = hsc(&m.field, &z, &v).unwrap();
        let hc = hsc(&scaled, &z, &v).unwrap();
        prop_assert!((hc - h / c).abs() <= 1e-9 * (1.0 + h.abs()));
    }

    #[test]
    fn model_metrics_are_kaehler(seed in any::<u64>(), which in 0usize..6) {
        let m = metric(METRICS[which]);
        let z = polydisc_point(&mut sample_rng(seed, 1), &m.region.center, m.region.radius);
        let t = torsion_defect(&m.field, &z).unwrap();
        prop_assert!(t.defect <= 1e-6 && t.via_connection <= 1e-6, "{:?}", t);
    }

    #[test]
    fn fibration_metrics_are_kaehler(seed in any::<u64>(), lambda in 0.0f64..6.0, hirz in any::<bool>()) {
        let model = match model_by_id(if hirz { "hirz:1" } else { "prod:fs1:fs1" }).unwrap() {
            Model::Fibration(f) => f,
            Model::Metric(_) => unreachable!(),
        };
        let h = h_lambda(&model, lambda).unwrap();
        let z = polydisc_point(&mut sample_rng(seed, 2), &model.region.center, model.region.radius);
        prop_assert!(torsion_defect(&h, &z).unwrap().defect <= 1e-6);
    }

    #[test]
    fn grassmannian_samples_stay_within_bounds(seed in any::<u64>(), which in 0usize..3) {
        let (k, n) = [(1, 3), (2, 4), (2, 5)][which];
        let gr = grassmannian_chart(k, n).unwrap();
        let region = Domain::origin(gr.chart_dim(), 0.7);
        let mut rng = sample_rng(seed, 3);
        let lo = 2.0 / (k * k) as f64;
        for _ in 0..20 {
            let z = polydisc_point(&mut rng, &region.center, region.radius);
            let v = sphere_direction(&mut rng, gr.chart_dim());
            let h = hsc(&gr.field, &z, &v).unwrap();
            prop_assert!(h >= lo - 1e-3 && h <= 2.0 + 1e-3, "H = {h}");
        }
    }
}

#[test]
fn pluecker_and_hom_routes_agree() {
    for (k, n) in [(2, 4), (2, 5), (1, 4), (3, 5)] {
        let hom = grassmannian_chart(k, n).unwrap();
        let pl = pluecker_pullback(k, n).unwrap();
        for z in region_points(&Domain::origin(hom.chart_dim(), 0.7), 20, 17 + n as u64) {
            let d = fro(&(hom.field.gram(&z).unwrap() - pl.gram(&z).unwrap()));
            assert!(d <= 1e-8, "Gr({k},{n}): {d}");
        }
    }
}

#[test]
fn model_metrics_are_einstein() {
    for (id, n) in [("fs:1", 2.0), ("fs:2", 3.0), ("fs:3", 4.0), ("gr:2:4", 4.0), ("gr:2:5", 5.0), ("gr:1:3", 3.0)] {
        let m = metric(id);
        let pts = region_points(&m.region, 10, 3);
        let r = einstein_residual(&m.field, n, &pts).unwrap();
        assert!(r <= 1e-6, "{id}: {r}");
        assert_eq!(m.einstein_constant, Some(n));
    }
}

#[test]
fn ricci_routes_agree_on_grassmannian() {
    let gr = grassmannian_chart(2, 4).unwrap();
    for z in region_points(&Domain::origin(4, 0.5), 3, 8) {
        let a = ricci(&gr.field, &z).unwrap();
        let b = ricci_fd(&gr.field, &z).unwrap();
        assert!(fro(&(&a - &b)) <= 1e-4 * (1.0 + fro(&a)));
    }
}

#[test]
fn scan_reports_are_reproducible_across_execution_modes() {
    let gr = grassmannian_chart(2, 4).unwrap();
    let region = Domain::origin(4, 0.7);
    let opts = |exec| ScanOptions {
        samples: 150,
        refinement_steps: 40,
        seed: 99,
        exec,
        ..Default::default()
    };
    let a = hsc_extremes(&gr.field, &region, &opts(hermitia::par::Exec::Auto)).unwrap();
    let b = hsc_extremes(&gr.field, &region, &opts(hermitia::par::Exec::Sequential)).unwrap();
    assert_eq!(a.min_h.to_bits(), b.min_h.to_bits());
    assert_eq!(a.max_h.to_bits(), b.max_h.to_bits());
    assert!(a.max_h <= 2.0 + 1e-9 && a.min_h >= 1.0 - 1e-9);
}
