//! End-to-end checks of the fibration positivity machinery.

use hermitia::chart_calc::{hsc, torsion_defect};
use hermitia::fibration::*;
use hermitia::models::{model_by_id, region_points, Model};
use hermitia::par::Exec;
use hermitia::sampling::{polydisc_point, sample_rng, sphere_direction};

fn fibration(id: &str) -> FibrationModel {
    match model_by_id(id).unwrap() {
        Model::Fibration(f) => f,
        Model::Metric(_) => panic!("{id} is not a fibration"),
    }
}

fn quick(seed: u64, exec: Exec) -> LambdaScanOptions {
    LambdaScanOptions {
        schedule: (0..=4).map(f64::from).collect(),
        samples: 250,
        refinement_steps: 60,
        grid_points: 10,
        seed,
        exec,
        ..Default::default()
    }
}

#[test]
fn twisted_surfaces_need_a_positive_weight() {
    // Hirzebruch twists 2 and 3 have negative H at λ = 0 and a finite λ₀.
    for id in ["hirz:2", "hirz:3"] {
        let res = find_lambda0(&fibration(id), &quick(20240601, Exec::Auto)).unwrap();
        let l0 = res.lambda0.expect("finite lambda0");
        assert!(l0 > 0.0, "{id}: {l0}");
        assert!(res.records[0].min_h.unwrap() < 0.0);
        assert!(res.positive_beyond_lambda0);
        assert!(res.stability.as_ref().unwrap().min_h.unwrap() > 0.0);
    }
}

#[test]
fn flat_factors_never_become_positive() {
    for id in ["prod:flat1:fs1", "prod:fs1:flat1"] {
        let res = find_lambda0(&fibration(id), &quick(3, Exec::Auto)).unwrap();
        assert_eq!(res.lambda0, None, "{id}");
        assert!(!res.positive_beyond_lambda0);
    }
}

#[test]
fn scans_do_not_depend_on_execution_mode() {
    let m = fibration("hirz:2");
    let a = find_lambda0(&m, &quick(11, Exec::Auto)).unwrap();
    let b = find_lambda0(&m, &quick(11, Exec::Sequential)).unwrap();
    assert_eq!(a.lambda0, b.lambda0);
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.min_h.map(f64::to_bits), y.min_h.map(f64::to_bits));
    }
}

#[test]
fn limit_form_rate_on_random_points() {
    let grid = [2.0, 4.0, 6.0, 8.0];
    for id in ["hirz:1", "hirz:2", "prod:fs1:fs1"] {
        let m = fibration(id);
        for z in region_points(&m.region, 10, 41) {
            let rec = q_lambda_limit(&m, &z, &grid).unwrap();
            assert!(rec.projection_residual <= 1e-8, "{id}: {}", rec.projection_residual);
            assert!(rec.semipositive);
            for (r, e) in rec.error_ratios.iter().zip(&rec.expected_ratios) {
                assert!((r / e - 1.0).abs() <= 0.2, "{id}: {r} vs {e}");
            }
        }
    }
}

#[test]
fn decomposed_curvature_matches_direct_where_ranks_allow() {
    let mut applicable = 0;
    for id in ["prod:fs1:fs1", "hirz:1", "hirz:2"] {
        let m = fibration(id);
        for (i, z) in region_points(&m.region, 6, 5).into_iter().enumerate() {
            let r = r_lambda_decomposed(&m, 0.5 + i as f64, &z).unwrap();
            if let Some(res) = r.residual {
                applicable += 1;
                assert!(res <= 1e-4, "{id}: {res}");
            } else {
                assert!(r.not_applicable.is_some());
            }
        }
    }
    assert!(applicable > 0);
}

#[test]
fn weighted_metrics_stay_kaehler_and_fibers_keep_their_curvature() {
    let m = fibration("hirz:2");
    let mut rng = sample_rng(8, 0);
    for lambda in [0.0, 2.0, 5.0] {
        let h = h_lambda(&m, lambda).unwrap();
        let z = polydisc_point(&mut rng, &m.region.center, m.region.radius);
        assert!(torsion_defect(&h, &z).unwrap().defect <= 1e-6);
        let v = sphere_direction(&mut rng, 2);
        assert!(hsc(&h, &z, &v).unwrap().is_finite());
    }
    let grid = region_points(&m.region, 4, 2);
    let rep = vertical_hsc_check(&m, &grid, &[0.0, 3.0, 6.0], 2, 9).unwrap();
    assert!(!rep.flagged, "{:?}", rep.max_deviation_by_lambda);
}

#[test]
fn invalid_models_are_rejected() {
    let m = fibration("hirz:1");
    assert!(matches!(with_negated_fiber(&m), Err(hermitia::Error::InvalidModel(_))));
}
