use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use steklov_bench::{pencil, problem};
use steklov_core::eigen::solve_largest;
use steklov_core::fem::{assemble_stiffness, build_space, ElasticMaterial};
use steklov_core::mesh::Domain;
use steklov_core::sparse::{CholeskyFactor, FactorOptions, Ordering};
use steklov_core::solve_steklov;

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    for n in [20, 40, 80] {
        let mesh = Domain::Square.generate(n).unwrap();
        let space = build_space(&mesh, 1).unwrap();
        let material = ElasticMaterial::new(1.0, 1.0, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("square_p1", n), &space, |b, s| {
            b.iter(|| assemble_stiffness(black_box(s), &material))
        });
    }
    g.finish();
}

fn factorization(c: &mut Criterion) {
    let mut g = c.benchmark_group("cholesky");
    g.sample_size(20);
    let (a, _) = pencil(Domain::Square, 60);
    for ordering in [Ordering::ReverseCuthillMcKee, Ordering::NestedDissection] {
        g.bench_function(format!("{ordering:?}"), |b| {
            b.iter(|| CholeskyFactor::factorize_with(black_box(&a), FactorOptions { ordering, ..FactorOptions::default() }))
        });
    }
    g.finish();
}

fn eigensolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("lanczos");
    g.sample_size(10);
    for n in [20, 40] {
        let (a, bm) = pencil(Domain::Square, n);
        g.bench_with_input(BenchmarkId::new("square", n), &n, |b, _| {
            b.iter(|| solve_largest(&a, &bm, 10, 1e-10, 2000).unwrap())
        });
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("steklov");
    g.sample_size(10);
    for (domain, level) in [(Domain::Square, 40), (Domain::Lshape, 16), (Domain::Disk, 64), (Domain::Cube, 6)] {
        let p = problem(domain, level, 1, 7);
        g.bench_function(domain.name(), |b| b.iter(|| solve_steklov(black_box(&p)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, assembly, factorization, eigensolve, pipeline);
criterion_main!(benches);
