//! Seeded random chains for property checks, benchmarks and self-tests.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ChainConfig, FrequencyUnit, SubsystemParams, WaveguideLink};

/// Range of log-uniform rates and detunings, in κ₀ units.
pub const RATE_RANGE: (f64, f64) = (0.01, 100.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn signed_log_uniform<R: Rng>(rng: &mut R) -> f64 {
    let magnitude = log_uniform(rng, RATE_RANGE.0, RATE_RANGE.1);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

fn rate<R: Rng>(rng: &mut R) -> f64 {
    log_uniform(rng, RATE_RANGE.0, RATE_RANGE.1)
}

/// Chain of `n` subsystems in κ₀ units with lossy links.
///
/// The first cavity has κ₀ = 1; every other rate and detuning is
/// log-uniform in [`RATE_RANGE`]. About a quarter of the cavities are empty.
/// Link phases are uniform in [0, 4π).
pub fn random_chain<R: Rng>(rng: &mut R, n: usize) -> ChainConfig {
    random_chain_with_loss(rng, n, true)
}

/// As [`random_chain`], optionally with every link lossless.
pub fn random_chain_with_loss<R: Rng>(rng: &mut R, n: usize, lossy_links: bool) -> ChainConfig {
    let subsystems = (0..n)
        .map(|j| {
            let kappa0 = if j == 0 { 1.0 } else { rate(rng) };
            let cavity = SubsystemParams::empty(signed_log_uniform(rng), kappa0, rate(rng));
            if rng.random_bool(0.25) {
                cavity
            } else {
                cavity.with_dot(signed_log_uniform(rng), rate(rng), rate(rng), rate(rng))
            }
        })
        .collect::<Vec<_>>();
    let links = (1..n)
        .map(|_| WaveguideLink {
            theta: rng.random_range(0.0..4.0 * PI),
            power_loss: if lossy_links {
                rng.random_range(0.0..0.2)
            } else {
                0.0
            },
        })
        .collect();
    ChainConfig {
        units: FrequencyUnit::Kappa0,
        reference_frequency: 0.0,
        subsystems,
        links,
        mirror: None,
    }
}

/// Relative distance `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}
