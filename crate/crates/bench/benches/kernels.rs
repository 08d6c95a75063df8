use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use hypercurv::kernel::elementary_symmetric_all;
use hypercurv::{
    assemble, lr_rho_identity_check, minkowski_check, newton_family, sample, sample_mesh, Tolerances,
};
use hypercurv_bench::{curvature_values, icosphere_samples, icosphere_source, shape_operator, torus_samples, torus_source};

fn pointwise(c: &mut Criterion) {
    let mut g = c.benchmark_group("pointwise");
    for n in [2, 4, 8] {
        let k = curvature_values(n);
        g.bench_with_input(BenchmarkId::new("elementary_symmetric", n), &k, |b, k| {
            b.iter(|| elementary_symmetric_all(black_box(k)))
        });
        let a = shape_operator(n);
        g.bench_with_input(BenchmarkId::new("newton_family", n), &a, |b, a| {
            b.iter(|| newton_family(black_box(a)).unwrap())
        });
    }
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sampling");
    g.sample_size(10);
    let src = torus_source();
    for res in [32, 64] {
        g.bench_with_input(BenchmarkId::new("torus", res), &res, |b, &res| {
            b.iter(|| sample(&src, res).unwrap())
        });
    }
    let mesh = icosphere_source(4);
    g.bench_function("icosphere_l4", |b| b.iter(|| sample_mesh(&mesh).unwrap()));
    g.finish();
}

fn checks(c: &mut Criterion) {
    let mut g = c.benchmark_group("checks");
    g.sample_size(10);
    let tol = Tolerances::analytic();
    let set = torus_samples(64);
    g.bench_function("minkowski_torus_64", |b| b.iter(|| minkowski_check(&set, 1, &tol).unwrap()));
    g.bench_function("lr_identity_torus_64", |b| {
        b.iter(|| lr_rho_identity_check(&set, 1, &tol).unwrap())
    });
    let mesh = icosphere_samples(4);
    for r in [0, 1] {
        g.bench_with_input(BenchmarkId::new("assemble_icosphere_l4", r), &r, |b, &r| {
            b.iter(|| assemble(&mesh, r).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, pointwise, sampling, checks);
criterion_main!(benches);
