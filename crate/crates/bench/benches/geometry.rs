use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use statwintgen::statistical::{curvature, ConnectionKind, DerivativeMode};
use statwintgen::suites::builtin_chart;
use statwintgen::tensor::random_symmetric_traceless;
use statwintgen::wintgen::{lu_inequality, main_inequality, random_instance, sweep, InstanceParams, Pairing, SweepConfig};

fn curvature_tensors(c: &mut Criterion) {
    let chart = builtin_chart("h3").unwrap();
    let p = [0.1, 0.2, -0.3];
    let mut group = c.benchmark_group("curvature_h3");
    for (name, mode) in [("analytic", DerivativeMode::Auto), ("finite_difference", DerivativeMode::FiniteDifference(1e-5))] {
        group.bench_function(name, |b| {
            b.iter(|| curvature(&chart, ConnectionKind::Nabla, black_box(&p), mode).unwrap())
        });
    }
    group.finish();
}

fn wintgen_report(c: &mut Criterion) {
    let mut group = c.benchmark_group("main_inequality");
    for n in [2usize, 3, 5] {
        let inst = random_instance(&InstanceParams { n, ..InstanceParams::default() }, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| main_inequality(black_box(inst), None).unwrap())
        });
    }
    group.finish();
}

fn lu(c: &mut Criterion) {
    let ms = random_symmetric_traceless(6, 5, 3);
    c.bench_function("lu_inequality_6x5", |b| {
        b.iter(|| lu_inequality(black_box(&ms), Pairing::Ordered).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let config = SweepConfig {
        base_seed: 7,
        count: 500,
        n_values: vec![3],
        params: InstanceParams::default(),
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("n3_500", |b| b.iter(|| sweep(black_box(&config)).unwrap()));
    group.finish();
}

criterion_group!(benches, curvature_tensors, wintgen_report, lu, sweeps);
criterion_main!(benches);
