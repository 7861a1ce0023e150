use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tunnelnav_bench::torus_fixture;
use tunnelnav_core::{mdpbe, project, scan, surface_frame, ProjectionConfig, Uv, Vec3};

fn frame(c: &mut Criterion) {
    let (t, _) = torus_fixture();
    c.bench_function("surface_frame", |b| {
        b.iter(|| surface_frame(&t, black_box(&Uv::new(0.7, 1.3))).unwrap())
    });
}

fn projection(c: &mut Criterion) {
    let (t, _) = torus_fixture();
    let r = Vec3::new(0.5, 2.1, 0.1);
    let cfg = ProjectionConfig::default();
    c.bench_function("project", |b| {
        b.iter(|| project(&t, black_box(&r), &cfg).unwrap())
    });
}

fn cone_scan(c: &mut Criterion) {
    let (t, s) = torus_fixture();
    let r = Vec3::new(2.2, 0.0, 0.0);
    let mut g = c.benchmark_group("scan");
    g.sample_size(20);
    g.bench_function("256 rays", |b| {
        b.iter(|| scan(&t, black_box(&r), 0.1, &s).unwrap())
    });
    g.finish();
}

fn estimator(c: &mut Criterion) {
    let (t, s) = torus_fixture();
    let r = Vec3::new(2.2, 0.0, 0.0);
    let mut g = c.benchmark_group("mdpbe");
    g.sample_size(20);
    g.bench_function("alpha 0.1", |b| {
        b.iter(|| mdpbe(&t, black_box(&r), &s).unwrap())
    });
    g.finish();
}

criterion_group!(benches, frame, projection, cone_scan, estimator);
criterion_main!(benches);
