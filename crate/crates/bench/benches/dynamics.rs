use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dce_core::{
    evolve_summary, pulse_coefficients, rectangular_pulse_for, resonance_period, simulate, IntegrationOptions,
    PulseProfile, PulseTrain,
};

fn ode(c: &mut Criterion) {
    let pulse = rectangular_pulse_for(0.01, 0.005, 1.2, 1.0).unwrap();
    let phi = pulse_coefficients(&pulse, 1.0).unwrap().phi;
    let train = PulseTrain::new(pulse, resonance_period(1.0, phi, 1).unwrap(), 100).unwrap();
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.bench_function("rectangular_100_pulses", |b| {
        b.iter(|| simulate(black_box(&train), 1.0, 1.0, train.end_time(), &IntegrationOptions::default()).unwrap())
    });
    let rd = PulseProfile::rise_decay(0.03, 0.001, 0.2, 0.4, 1.5).unwrap();
    let train = PulseTrain::new(rd, 3.127, 100).unwrap();
    g.bench_function("rise_decay_100_pulses", |b| {
        b.iter(|| simulate(black_box(&train), 1.0, 1.0, train.end_time(), &IntegrationOptions::default()).unwrap())
    });
    g.finish();
}

fn closed_form(c: &mut Criterion) {
    c.bench_function("evolve_summary", |b| b.iter(|| evolve_summary(black_box(0.01), 0.005, 1.0, 1.0, 500).unwrap()));
    let pulse = PulseProfile::rise_decay(0.03, 0.001, 0.2, 0.4, 1.5).unwrap();
    c.bench_function("pulse_coefficients", |b| b.iter(|| pulse_coefficients(black_box(&pulse), 1.0).unwrap()));
}

criterion_group!(benches, ode, closed_form);
criterion_main!(benches);
