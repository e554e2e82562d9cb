//! Sequential versus rayon execution of the sampling-heavy scans.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hermitia::chart_calc::Domain;
use hermitia::fibration::{find_lambda0, LambdaScanOptions};
use hermitia::models::{grassmannian_chart, hirzebruch_model, hsc_extremes, ScanOptions};
use hermitia::par::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Auto)];

fn hsc_scan(c: &mut Criterion) {
    let gr = grassmannian_chart(2, 4).unwrap();
    let region = Domain::origin(4, 0.7);
    let mut group = c.benchmark_group("hsc_extremes_gr24");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = ScanOptions {
            samples: 500,
            refinement_steps: 50,
            seed: 1,
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| black_box(hsc_extremes(&gr.field, &region, opts).unwrap().min_h))
        });
    }
    group.finish();
}

fn lambda_scan(c: &mut Criterion) {
    let model = hirzebruch_model(2).unwrap();
    let mut group = c.benchmark_group("find_lambda0_hirz2");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = LambdaScanOptions {
            schedule: vec![0.0, 1.0, 2.0],
            samples: 200,
            refinement_steps: 40,
            grid_points: 10,
            seed: 1,
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| black_box(find_lambda0(&model, opts).unwrap().lambda0))
        });
    }
    group.finish();
}

criterion_group!(benches, hsc_scan, lambda_scan);
criterion_main!(benches);
