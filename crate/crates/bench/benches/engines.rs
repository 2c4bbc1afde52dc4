use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tmsq_core::fock::{s2_oracle, thermal_weighted_distribution};
use tmsq_core::protocol::{echo_ratio_vs_delay, two_mode_protocol};
use tmsq_core::spectroscopy::{
    gaussian_fit, synthesize_velocity_scan, tmsv_ratio, velocity_width, DetuningGrid, ScanNoise,
    VelocityScanOptions,
};
use tmsq_core::{InhomogeneityModel, OscillatorConfig, ScanAxis, SidebandModel, TwoModeSqueezeOp};

fn gaussian(c: &mut Criterion) {
    let cfg = OscillatorConfig::rb85_with_jump(1.21).unwrap();
    let evo = two_mode_protocol(&cfg, FRAC_PI_2).unwrap();
    c.bench_function("two_mode_state_at", |b| {
        b.iter(|| evo.state_at(black_box(1.3e-6)).unwrap())
    });
    let state = evo.state_at(0.0).unwrap();
    c.bench_function("symplectic_eigenvalues", |b| {
        b.iter(|| black_box(&state).symplectic_eigenvalues())
    });
}

fn fock(c: &mut Criterion) {
    let op = TwoModeSqueezeOp::new(1.2, 0.0).unwrap();
    c.bench_function("thermal_weighted_distribution_25", |b| {
        b.iter(|| thermal_weighted_distribution(&op, black_box(0.06), 25).unwrap())
    });
    c.bench_function("s2_oracle_dim20", |b| {
        b.iter(|| s2_oracle(black_box(1.0), 20).unwrap())
    });
}

fn spectroscopy(c: &mut Criterion) {
    let model = SidebandModel::experiment_defaults();
    c.bench_function("tmsv_ratio", |b| {
        b.iter(|| tmsv_ratio(black_box(1.0), 0.06, &model, 25).unwrap())
    });

    let cfg = OscillatorConfig::rb85_with_jump(0.89).unwrap();
    let state = two_mode_protocol(&cfg, FRAC_PI_2)
        .unwrap()
        .lab_state_at(0.0)
        .unwrap();
    let truth = velocity_width(&state, ScanAxis::XPrime, &cfg).unwrap();
    let grid = DetuningGrid::symmetric(4.0 * VelocityScanOptions::default().k_eff * truth, 41);
    let opts = VelocityScanOptions {
        noise: Some(ScanNoise {
            relative_sd: 0.02,
            seed: 3,
        }),
        ..Default::default()
    };
    let scan = synthesize_velocity_scan(&state, ScanAxis::XPrime, &cfg, &grid, &opts).unwrap();
    c.bench_function("velocity_scan_fit", |b| {
        b.iter(|| gaussian_fit(black_box(&scan)).unwrap())
    });
}

fn echo(c: &mut Criterion) {
    let cfg = OscillatorConfig::rb85_with_jump(1.2).unwrap();
    let inhom = InhomogeneityModel::from_decay_time(80e-6).unwrap();
    let model = SidebandModel::experiment_defaults();
    let taus: Vec<f64> = (0..40).map(|k| k as f64 * 0.25e-6).collect();
    let mut group = c.benchmark_group("echo");
    group.sample_size(10);
    group.bench_function("echo_40_delays", |b| {
        b.iter(|| echo_ratio_vs_delay(1.2, 0.06, black_box(&taus), &cfg, &inhom, &model).unwrap())
    });
    group.finish();
}

criterion_group!(benches, gaussian, fock, spectroscopy, echo);
criterion_main!(benches);
