use std::f64::consts::PI;

use qdchain::presets::{self, pbs_silicon, GAMMA};
use qdchain::{
    calibrate_mirror_phase, cascade, dressed_mode_positions, evaluate_gate, fidelity_and_loss,
    find_features, gate_amplitudes, group_delay, scattering, sweep, validate_config, Channel,
    ChainConfig, FeatureKind, FrequencyGrid, MirrorTermination, SubsystemParams, ValidatedChain,
    WaveguideLink,
};

fn chain(config: &ChainConfig) -> ValidatedChain {
    validate_config(config).unwrap()
}

#[test]
fn peaks_fall_inside_widened_dressed_windows() {
    let configs = [
        presets::dot_and_empty_pair(0.0, GAMMA / 2.0),
        presets::dot_and_empty_pair(GAMMA / 2.0, GAMMA / 2.0),
        presets::dot_pair(GAMMA, GAMMA / 2.0),
    ];
    let grid = FrequencyGrid::new(-3.0 * GAMMA, 4.0 * GAMMA, 7001).unwrap();
    for config in &configs {
        let c = chain(config);
        let windows = dressed_mode_positions(&c).unwrap().windows;
        let peaks: Vec<f64> = find_features(&sweep(&c, &grid), 0.05)
            .into_iter()
            .filter(|f| f.kind == FeatureKind::Peak)
            .map(|f| f.omega_center)
            .collect();
        assert!(!peaks.is_empty());
        for p in peaks {
            assert!(
                windows.iter().any(|w| w.contains(p, 0.25 * GAMMA)),
                "peak at {p} outside {windows:?}"
            );
        }
    }
}

#[test]
fn integrated_delay_recovers_phase_change() {
    let c = chain(&presets::dot_pair(GAMMA, GAMMA / 2.0));
    let grid = FrequencyGrid::new(-2.0 * GAMMA, 3.0 * GAMMA, 20001).unwrap();
    let delay = group_delay(&sweep(&c, &grid), Channel::Transmission).unwrap();
    let integral: f64 = (1..delay.omega.len())
        .map(|k| 0.5 * (delay.tau[k] + delay.tau[k - 1]) * (delay.omega[k] - delay.omega[k - 1]))
        .sum();
    let total = delay.phase[delay.phase.len() - 1] - delay.phase[0];
    assert!(total.abs() > 1.0);
    assert!(((integral - total) / total).abs() < 0.01, "{integral} vs {total}");
}

#[test]
fn sweep_is_deterministic_and_matches_pointwise_evaluation() {
    let c = chain(&presets::dot_pair(GAMMA, GAMMA / 2.0));
    let grid = FrequencyGrid::new(-3.0 * GAMMA, 3.0 * GAMMA, 4001).unwrap();
    let a = sweep(&c, &grid);
    let b = sweep(&c, &grid);
    assert_eq!(a, b);
    for (p, omega) in a.points.iter().zip(grid.values()) {
        let s = scattering(&cascade(&c, omega).unwrap()).unwrap();
        assert_eq!(p.omega.to_bits(), omega.to_bits());
        assert_eq!((p.r, p.t), (s.r, s.t));
    }
}

#[test]
fn passive_spectra_have_bounded_loss_and_continuous_phase() {
    let c = chain(&presets::dot_pair(GAMMA / 2.0, GAMMA / 2.0));
    let spec = sweep(&c, &FrequencyGrid::new(-3.0 * GAMMA, 3.0 * GAMMA, 6001).unwrap());
    for w in spec.points.windows(2) {
        assert!((w[1].phase_t - w[0].phase_t).abs() < PI);
    }
    assert!(spec.points.iter().all(|p| (-1e-9..=1.0).contains(&p.loss())));
}

#[test]
fn photon_loss_respects_mirror_floor() {
    let base = chain(&presets::pbs_silicon_gate(0.0));
    let floor = (1.0 - pbs_silicon::MIRROR_REFLECTIVITY) / 4.0;
    let gamma = base.reference_decay();
    for k in 0..=20 {
        let g = 0.1 * k as f64 * gamma;
        let c = base
            .modified(|cfg| cfg.subsystems.iter_mut().for_each(|s| s.g = g))
            .unwrap();
        let result = evaluate_gate(&c, pbs_silicon::CARRIER).unwrap();
        assert!(result.photon_loss >= floor - 1e-9, "g = {g}: P = {}", result.photon_loss);
    }
}

#[test]
fn calibration_is_periodic_and_optimal_on_probe_grid() {
    let base = chain(&presets::pbs_silicon_gate(GAMMA * pbs_silicon::KAPPA0));
    let theta = calibrate_mirror_phase(&base, pbs_silicon::CARRIER).unwrap();
    assert!((0.0..2.0 * PI).contains(&theta));
    let mirror: MirrorTermination = *base.mirror().unwrap();
    let fidelity = |phase: f64| {
        let amps: Vec<_> = gate_amplitudes(&base, pbs_silicon::CARRIER, &mirror.with_phase(phase))
            .unwrap()
            .into_iter()
            .map(|(_, a)| a)
            .collect();
        fidelity_and_loss(&amps).unwrap().0
    };
    let best = fidelity(theta);
    assert!((fidelity(theta + 2.0 * PI) - best).abs() < 1e-12);
    for k in 0..1000 {
        assert!(fidelity(2.0 * PI * k as f64 / 1000.0) <= best + 1e-9);
    }
    assert_eq!(theta, calibrate_mirror_phase(&base, pbs_silicon::CARRIER).unwrap());
}

#[test]
fn single_qubit_optimum_opposes_the_dark_amplitude() {
    // Lossless cavity that reflects almost everything when empty and lets
    // the carrier through when its dot is coupled.
    let sub = SubsystemParams::empty(0.0, 0.0, 50.0).with_dot(0.0, 100.0, 0.0, 0.01);
    let config = ChainConfig::uniform(vec![sub], WaveguideLink::lossless(0.0))
        .with_mirror(MirrorTermination::new(1.0, 0.0));
    let base = chain(&config);
    let result = evaluate_gate(&base, -2.5).unwrap();
    let (dark, bright) = (result.amplitudes[0], result.amplitudes[1]);
    let mismatch = (bright / -dark).arg();
    assert!(mismatch.abs() < 1e-3, "arg mismatch {mismatch}");
    assert!(result.fidelity > 0.99);
}
