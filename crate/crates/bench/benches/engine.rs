use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdchain::presets::{self, pbs_silicon, GAMMA};
use qdchain::random::{random_chain, rng};
use qdchain::{
    calibrate_mirror_phase, cascade, oracle_scattering, sweep, validate_config, FrequencyGrid,
};

fn cascade_vs_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("single-frequency");
    for n in [1usize, 2, 4, 8] {
        let chain = validate_config(&random_chain(&mut rng(n as u64), n)).unwrap();
        group.bench_with_input(BenchmarkId::new("cascade", n), &chain, |b, chain| {
            b.iter(|| cascade(chain, black_box(0.3)))
        });
        group.bench_with_input(BenchmarkId::new("oracle", n), &chain, |b, chain| {
            b.iter(|| oracle_scattering(chain, black_box(0.3)))
        });
    }
    group.finish();
}

fn spectrum_sweep(c: &mut Criterion) {
    let chain = validate_config(&presets::dot_pair(GAMMA, GAMMA / 2.0)).unwrap();
    let grid = FrequencyGrid::new(-3.0 * GAMMA, 3.0 * GAMMA, 10_001).unwrap();
    c.bench_function("sweep 10k points, two dots", |b| {
        b.iter(|| sweep(&chain, &grid))
    });
}

fn mirror_calibration(c: &mut Criterion) {
    let chain = validate_config(&presets::pbs_silicon_gate(GAMMA * pbs_silicon::KAPPA0)).unwrap();
    c.bench_function("calibrate mirror phase, two qubits", |b| {
        b.iter(|| calibrate_mirror_phase(&chain, black_box(pbs_silicon::CARRIER)))
    });
}

criterion_group!(
    benches,
    cascade_vs_oracle,
    spectrum_sweep,
    mirror_calibration
);
criterion_main!(benches);
