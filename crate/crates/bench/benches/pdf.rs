use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dce_core::{asymptotic_for, converged_pdf, exact_pdf, CovarianceState, MMax};

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_pdf");
    for n in [10.0, 1e3, 1e5] {
        let s = CovarianceState::from_invariants(2.0 * n + 1.0, 0.6 * n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| exact_pdf(black_box(s), MMax::Auto).unwrap())
        });
    }
    let osc = CovarianceState::from_invariants(2001.0, 100.0).unwrap();
    g.bench_function("oscillating_m3000", |b| b.iter(|| exact_pdf(black_box(&osc), MMax::Fixed(3000)).unwrap()));
    g.finish();
}

fn asymptotic(c: &mut Criterion) {
    let smooth = CovarianceState::from_invariants(2001.0, 1500.0).unwrap();
    let osc = CovarianceState::from_invariants(2001.0, 100.0).unwrap();
    c.bench_function("asymptotic_smooth_m3000", |b| b.iter(|| asymptotic_for(black_box(&smooth), 3000).unwrap()));
    c.bench_function("asymptotic_oscillating_m3000", |b| b.iter(|| asymptotic_for(black_box(&osc), 3000).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let s = CovarianceState::from_invariants(11.0, 8.0).unwrap().rotated(0.4);
    let cover = exact_pdf(&s, MMax::Auto).unwrap().m_max();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("converged_n5", |b| b.iter(|| converged_pdf(black_box(&s), cover, 1e-10, 1e-12).unwrap()));
    g.finish();
}

criterion_group!(benches, exact, asymptotic, oracle);
criterion_main!(benches);
