use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use setopt::linalg::min_norm_point;
use setopt::partition::{minimal_structure, DEFAULT_VALUE_TOL};
use setopt::subproblem::{inner_minimax, theta_and_step, DerivativeCache, StepRegion};
use setopt_benches::{hull_points, Fixture};

fn linalg(c: &mut Criterion) {
    for (k, n) in [(8, 2), (64, 10), (400, 30)] {
        let pts = hull_points(k, n);
        c.bench_function(&format!("min_norm_point/{k}x{n}"), |b| b.iter(|| min_norm_point(black_box(&pts))));
    }
}

fn derivatives(c: &mut Criterion) {
    let f = Fixture::midpoint("zdt1_n10_m2");
    c.bench_function("fd_derivatives/zdt1_n10", |b| {
        b.iter(|| f.problem.derivatives(0, black_box(&f.x)).unwrap())
    });
}

fn structure(c: &mut Criterion) {
    let f = Fixture::midpoint("hil_n2_m2");
    c.bench_function("minimal_structure/hil", |b| {
        b.iter(|| minimal_structure(&f.problem, &f.cone, black_box(&f.x), DEFAULT_VALUE_TOL).unwrap())
    });
}

fn subproblem(c: &mut Criterion) {
    let f = Fixture::midpoint("hil_n2_m2");
    let s = minimal_structure(&f.problem, &f.cone, &f.x, DEFAULT_VALUE_TOL).unwrap();
    let mut cache = DerivativeCache::new(&f.problem, &f.x);
    let a: Vec<usize> = s.groups.iter().map(|g| g[0]).collect();
    let models = cache.models(&a, &f.cone).unwrap();
    let region = StepRegion::ball(f.problem.n(), 0.5);
    c.bench_function("inner_minimax/hil", |b| b.iter(|| inner_minimax(black_box(&models), &region)));
    c.bench_function("theta_and_step/hil", |b| {
        b.iter(|| theta_and_step(&f.problem, &f.cone, black_box(&f.x), 0.5).unwrap())
    });
}

criterion_group!(kernels, linalg, derivatives, structure, subproblem);
criterion_main!(kernels);
