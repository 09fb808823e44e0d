use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use spinon_core::specfun::log_gamma;
use spinon_core::{
    a_minus_sq_real, g_sum_sq, s2_pm, s4_pm, DsfContext, FourSpinonSpec, QuadratureSpec, Rapidity, ResidueSpec,
};

fn complex_log_gamma(c: &mut Criterion) {
    let z = Complex64::new(0.37, -2.9);
    c.bench_function("log_gamma", |b| b.iter(|| log_gamma(black_box(z))));
}

fn aminus(c: &mut Criterion) {
    let quad = QuadratureSpec::default();
    c.bench_function("a_minus_sq_real x=2", |b| b.iter(|| a_minus_sq_real(black_box(2.0), &quad)));
}

fn g_function(c: &mut Criterion) {
    let spec = ResidueSpec::default();
    let betas = [Rapidity(0.3), Rapidity(-1.1), Rapidity(0.7), Rapidity(2.0)];
    c.bench_function("g_sum_sq n=4", |b| b.iter(|| g_sum_sq(4, black_box(&betas), &spec)));
}

fn two_spinon(c: &mut Criterion) {
    let quad = QuadratureSpec::default();
    c.bench_function("s2_pm direct", |b| b.iter(|| s2_pm(black_box(3.5), black_box(2.2), &quad)));
    let ctx = DsfContext::new(quad, ResidueSpec::default()).unwrap();
    c.bench_function("s2_pm table", |b| b.iter(|| ctx.s2_pm(black_box(3.5), black_box(2.2))));
}

fn four_spinon(c: &mut Criterion) {
    let ctx = DsfContext::new(QuadratureSpec::default(), ResidueSpec::default()).unwrap();
    let spec = FourSpinonSpec { nodes: 16, ..Default::default() };
    let mut group = c.benchmark_group("s4_pm");
    group.sample_size(10);
    group.bench_function("nodes=16", |b| b.iter(|| s4_pm(black_box(4.0), black_box(2.5), &spec, &ctx)));
    group.finish();
}

criterion_group!(benches, complex_log_gamma, aminus, g_function, two_spinon, four_spinon);
criterion_main!(benches);
