//! Reference parameter sets: over-coupled cavities (κ₁ = 50κ₀) joined by
//! links of phase 20π, with dots of decoherence γ = κ₀.

use std::f64::consts::PI;

use crate::gate::DetuningScenario;
use crate::model::{ChainConfig, FrequencyUnit, MirrorTermination, SubsystemParams, WaveguideLink};

pub const KAPPA1_OVER_KAPPA0: f64 = 50.0;
pub const LINK_PHASE: f64 = 20.0 * PI;

/// Γ in κ₀ units for the reference cavity.
pub const GAMMA: f64 = (1.0 + 2.0 * KAPPA1_OVER_KAPPA0) / 2.0;

pub fn cavity(omega_c: f64) -> SubsystemParams {
    SubsystemParams::empty(omega_c, 1.0, KAPPA1_OVER_KAPPA0)
}

/// Cavity with a resonant dot of coupling `g` and γ = κ₀.
pub fn dotted_cavity(omega_c: f64, g: f64) -> SubsystemParams {
    cavity(omega_c).with_dot(omega_c, g, 0.0, 1.0)
}

fn chain(subsystems: Vec<SubsystemParams>) -> ChainConfig {
    ChainConfig::uniform(subsystems, WaveguideLink::lossless(LINK_PHASE))
}

/// Two empty cavities, the second detuned by `detuning`.
pub fn empty_pair(detuning: f64) -> ChainConfig {
    chain(vec![cavity(0.0), cavity(detuning)])
}

/// Dot in the first cavity only.
pub fn dot_and_empty_pair(detuning: f64, g: f64) -> ChainConfig {
    chain(vec![dotted_cavity(0.0, g), cavity(detuning)])
}

/// Resonant dot in each cavity.
pub fn dot_pair(detuning: f64, g: f64) -> ChainConfig {
    chain(vec![dotted_cavity(0.0, g), dotted_cavity(detuning, g)])
}

/// PbS dots in Si nanocavities, in GHz: κ₀ from Q ≈ 10⁶ at 1550 nm,
/// γ_s = 2 MHz, γ_p = 1 GHz.
pub mod pbs_silicon {
    pub const KAPPA0: f64 = 1.216;
    pub const GAMMA_S: f64 = 0.002;
    pub const GAMMA_P: f64 = 1.0;
    pub const MIRROR_REFLECTIVITY: f64 = 0.95;
    pub const SCATTERING_LOSS: f64 = 0.01;
    /// Carrier offset from the common resonance, in κ₀.
    pub const CARRIER: f64 = -2.5;
}

/// Two-qubit gate chain in absolute units (GHz) with coupling `g` (GHz):
/// 1% loss on every link pass including the mirror segment, 95% mirror.
pub fn pbs_silicon_gate(g: f64) -> ChainConfig {
    use pbs_silicon::*;
    let sub = SubsystemParams::empty(0.0, KAPPA0, KAPPA1_OVER_KAPPA0 * KAPPA0)
        .with_dot(0.0, g, GAMMA_S, GAMMA_P);
    ChainConfig {
        units: FrequencyUnit::Absolute,
        reference_frequency: 0.0,
        subsystems: vec![sub, sub],
        links: vec![WaveguideLink {
            theta: LINK_PHASE,
            power_loss: SCATTERING_LOSS,
        }],
        mirror: Some(MirrorTermination {
            reflectivity: MIRROR_REFLECTIVITY,
            phase: 0.0,
            segment_loss: SCATTERING_LOSS,
        }),
    }
}

/// Second cavity (with its dot) shifted by `cavity_detuning`, both dots
/// detuned from their cavities by `qd_detuning`; κ₀ units.
pub fn pair_scenario(cavity_detuning: f64, qd_detuning: f64) -> DetuningScenario {
    DetuningScenario {
        id: format!("d21={cavity_detuning:.4};dqd={qd_detuning:.4}"),
        cavity_detunings: vec![0.0, cavity_detuning],
        qd_detunings: vec![qd_detuning, qd_detuning],
    }
}
