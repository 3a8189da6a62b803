//! The mirror-terminated chain as an N-qubit conditional phase gate.
//!
//! Each dot with a transition frequency is a stationary qubit. In `|g⟩` it
//! couples to its cavity with strength `g`; in `|r⟩` it is dark and the
//! cavity behaves as empty. A photon reflected from the chain picks up an
//! amplitude λ that depends on the qubit configuration. The target is
//! λ = +1 for the all-`|g⟩` configuration and −1 for every other one, which
//! is `exp(iπ|g…g⟩⟨g…g|)` up to a global sign.
//!
//! Fidelity is the overlap of the normalized output state with the ideal one
//! for the uniform superposition input, so it is conditional on the photon
//! coming back. The loss of the photon is reported separately.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{MirrorTermination, ModelError, ValidatedChain};
use crate::transfer::{cascade, terminated_reflection, TransferError, TransferMatrix};

pub const MAX_QUBITS: usize = 10;

/// Default carrier, relative to the reference frequency, in κ₀ units.
pub const DEFAULT_CARRIER: f64 = -2.5;

/// Number of coarse mirror-phase samples over [0, 2π).
pub const CALIBRATION_GRID: usize = 720;

/// Bracket width at which golden-section refinement stops.
pub const CALIBRATION_TOLERANCE: f64 = 1e-6;

/// Coarse samples within this of the best are ties.
const TIE_TOLERANCE: f64 = 1e-12;

/// Human-readable statement of the fidelity convention, written into every
/// output artifact.
pub const FIDELITY_CONVENTION: &str = "conditional state-overlap fidelity for the uniform \
superposition input; ideal amplitudes +1 for all-g and -1 otherwise; photon loss \
P = 1 - mean |lambda|^2 reported separately";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("qubit configuration has {found} entries but the chain has {expected} subsystems")]
    LengthMismatch { expected: usize, found: usize },
    #[error("chain has no qubits")]
    NoQubits,
    #[error("chain has {0} qubits; at most {MAX_QUBITS} are supported")]
    TooManyQubits(usize),
    #[error("amplitude count {0} is not a power of two >= 2")]
    InvalidAmplitudeCount(usize),
    #[error("all amplitudes vanish; fidelity undefined")]
    AllAmplitudesZero,
    #[error("gate evaluation needs a terminating mirror")]
    MissingMirror,
    #[error("scenario {id}: {field} has {found} entries, expected {expected}")]
    ScenarioLength {
        id: String,
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("configuration {configuration}: {source}")]
    Engine {
        configuration: String,
        source: TransferError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitState {
    /// Coupled ground state `|g⟩`.
    G,
    /// Uncoupled ground state `|r⟩`.
    R,
    /// Subsystem without a stationary qubit.
    NoQubit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitConfiguration(pub Vec<QubitState>);

impl QubitConfiguration {
    /// Qubit states only, e.g. `"gr"`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .filter_map(|s| match s {
                QubitState::G => Some('g'),
                QubitState::R => Some('r'),
                QubitState::NoQubit => None,
            })
            .collect()
    }

    pub fn all_coupled(&self) -> bool {
        self.0.iter().all(|s| *s != QubitState::R)
    }
}

impl fmt::Display for QubitConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Indices of subsystems that host a qubit.
pub fn qubit_sites(chain: &ValidatedChain) -> Vec<usize> {
    chain
        .subsystems()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.omega_r.is_some())
        .map(|(j, _)| j)
        .collect()
}

/// All 2ⁿ configurations, ordered so that index bit `n-1-k` set means qubit
/// `k` is in `|g⟩`. The all-`|g⟩` configuration is last.
pub fn configurations(chain: &ValidatedChain) -> Result<Vec<QubitConfiguration>, GateError> {
    let sites = qubit_sites(chain);
    let n = sites.len();
    if n == 0 {
        return Err(GateError::NoQubits);
    }
    if n > MAX_QUBITS {
        return Err(GateError::TooManyQubits(n));
    }
    Ok((0..1usize << n)
        .map(|index| {
            let mut states = vec![QubitState::NoQubit; chain.len()];
            for (k, &site) in sites.iter().enumerate() {
                let bit = (index >> (n - 1 - k)) & 1;
                states[site] = if bit == 1 { QubitState::G } else { QubitState::R };
            }
            QubitConfiguration(states)
        })
        .collect())
}

/// Chain as seen by the photon when the qubits are in `q`: dots in `|r⟩`
/// are decoupled.
pub fn configured_chain(
    base: &ValidatedChain,
    q: &QubitConfiguration,
) -> Result<ValidatedChain, GateError> {
    if q.0.len() != base.len() {
        return Err(GateError::LengthMismatch {
            expected: base.len(),
            found: q.0.len(),
        });
    }
    Ok(base.modified(|config| {
        for (sub, state) in config.subsystems.iter_mut().zip(&q.0) {
            if *state == QubitState::R {
                sub.g = 0.0;
            }
        }
    })?)
}

fn configuration_matrices(
    base: &ValidatedChain,
    carrier: f64,
) -> Result<Vec<(QubitConfiguration, TransferMatrix)>, GateError> {
    configurations(base)?
        .into_iter()
        .map(|q| {
            let chain = configured_chain(base, &q)?;
            let m = cascade(&chain, carrier).map_err(|source| GateError::Engine {
                configuration: q.label(),
                source,
            })?;
            Ok((q, m))
        })
        .collect()
}

fn reflect_all(
    matrices: &[(QubitConfiguration, TransferMatrix)],
    rho: Complex64,
) -> Result<Vec<Complex64>, GateError> {
    matrices
        .iter()
        .map(|(q, m)| {
            terminated_reflection(m, rho).map_err(|source| GateError::Engine {
                configuration: q.label(),
                source,
            })
        })
        .collect()
}

/// Reflection amplitude of the terminated chain for every configuration.
pub fn gate_amplitudes(
    base: &ValidatedChain,
    carrier: f64,
    mirror: &MirrorTermination,
) -> Result<Vec<(QubitConfiguration, Complex64)>, GateError> {
    let matrices = configuration_matrices(base, carrier)?;
    let amplitudes = reflect_all(&matrices, mirror.reflection_factor())?;
    Ok(matrices.into_iter().map(|(q, _)| q).zip(amplitudes).collect())
}

/// Conditional fidelity F and photon loss P for amplitudes in
/// [`configurations`] order.
pub fn fidelity_and_loss(amplitudes: &[Complex64]) -> Result<(f64, f64), GateError> {
    let count = amplitudes.len();
    if count < 2 || !count.is_power_of_two() {
        return Err(GateError::InvalidAmplitudeCount(count));
    }
    let power: f64 = amplitudes.iter().map(|l| l.norm_sqr()).sum();
    if power == 0.0 {
        return Err(GateError::AllAmplitudesZero);
    }
    let overlap: Complex64 = amplitudes[..count - 1].iter().map(|l| -l).sum::<Complex64>()
        + amplitudes[count - 1];
    let fidelity = overlap.norm_sqr() / (count as f64 * power);
    let loss = 1.0 - power / count as f64;
    Ok((fidelity, loss))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateResult {
    pub configurations: Vec<QubitConfiguration>,
    pub amplitudes: Vec<Complex64>,
    pub fidelity: f64,
    pub photon_loss: f64,
    pub mirror_phase: f64,
    pub carrier: f64,
}

impl GateResult {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn calibrate(
    matrices: &[(QubitConfiguration, TransferMatrix)],
    mirror: &MirrorTermination,
) -> Result<f64, GateError> {
    let fidelity_at = |phase: f64| -> Result<f64, GateError> {
        let amplitudes = reflect_all(matrices, mirror.with_phase(phase).reflection_factor())?;
        Ok(fidelity_and_loss(&amplitudes)?.0)
    };

    let step = 2.0 * PI / CALIBRATION_GRID as f64;
    let coarse = (0..CALIBRATION_GRID)
        .map(|k| fidelity_at(k as f64 * step))
        .collect::<Result<Vec<_>, _>>()?;
    let best = coarse.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let k_best = coarse
        .iter()
        .position(|f| *f >= best - TIE_TOLERANCE)
        .unwrap_or(0);
    let coarse_phase = k_best as f64 * step;

    // A failing probe inside the bracket scores as the worst possible value.
    let refined = golden_section_max(
        |phase| fidelity_at(phase).unwrap_or(f64::NEG_INFINITY),
        coarse_phase - step,
        coarse_phase + step,
        CALIBRATION_TOLERANCE,
    );
    let refined_fidelity = fidelity_at(refined).unwrap_or(f64::NEG_INFINITY);
    let phase = if refined_fidelity > coarse[k_best] {
        refined
    } else {
        coarse_phase
    };
    Ok(phase.rem_euclid(2.0 * PI))
}

/// Mirror phase in [0, 2π) that maximizes the fidelity at `carrier`.
pub fn calibrate_mirror_phase(base: &ValidatedChain, carrier: f64) -> Result<f64, GateError> {
    let mirror = base.mirror().ok_or(GateError::MissingMirror)?;
    let matrices = configuration_matrices(base, carrier)?;
    calibrate(&matrices, mirror)
}

/// Calibrates the mirror and evaluates F and P at `carrier`.
pub fn evaluate_gate(base: &ValidatedChain, carrier: f64) -> Result<GateResult, GateError> {
    let mirror = base.mirror().ok_or(GateError::MissingMirror)?;
    let matrices = configuration_matrices(base, carrier)?;
    let mirror_phase = calibrate(&matrices, mirror)?;
    let amplitudes = reflect_all(&matrices, mirror.with_phase(mirror_phase).reflection_factor())?;
    let (fidelity, photon_loss) = fidelity_and_loss(&amplitudes)?;
    Ok(GateResult {
        configurations: matrices.into_iter().map(|(q, _)| q).collect(),
        amplitudes,
        fidelity,
        photon_loss,
        mirror_phase,
        carrier,
    })
}

/// Detunings applied on top of the base chain, in κ₀ units.
///
/// `cavity_detunings[j]` shifts cavity `j` and its dot together;
/// `qd_detunings[j]` sets `ω_c,j − ω_r,j` relative to the base chain.
/// Empty vectors mean no shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningScenario {
    pub id: String,
    #[serde(default)]
    pub cavity_detunings: Vec<f64>,
    #[serde(default)]
    pub qd_detunings: Vec<f64>,
}

impl DetuningScenario {
    pub fn resonant() -> Self {
        Self {
            id: "resonant".to_string(),
            cavity_detunings: Vec::new(),
            qd_detunings: Vec::new(),
        }
    }

    fn check(&self, n: usize) -> Result<(), GateError> {
        for (field, values) in [
            ("cavity_detunings", &self.cavity_detunings),
            ("qd_detunings", &self.qd_detunings),
        ] {
            if !values.is_empty() && values.len() != n {
                return Err(GateError::ScenarioLength {
                    id: self.id.clone(),
                    field,
                    expected: n,
                    found: values.len(),
                });
            }
        }
        Ok(())
    }

    /// Base chain with this scenario's detunings and every dot's coupling set
    /// to `g`.
    pub fn apply(&self, base: &ValidatedChain, g: Option<f64>) -> Result<ValidatedChain, GateError> {
        self.check(base.len())?;
        Ok(base.modified(|config| {
            for (j, sub) in config.subsystems.iter_mut().enumerate() {
                let shift = self.cavity_detunings.get(j).copied().unwrap_or(0.0);
                let qd = self.qd_detunings.get(j).copied().unwrap_or(0.0);
                sub.omega_c += shift;
                if let Some(omega_r) = sub.omega_r.as_mut() {
                    *omega_r += shift - qd;
                    if let Some(g) = g {
                        sub.g = g;
                    }
                }
            }
        })?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateSweepRow {
    pub g_over_gamma: f64,
    pub scenario_id: String,
    pub result: Result<GateResult, GateError>,
}

/// Evaluates the gate on every (g/Γ, scenario) cell, Γ being the first
/// cavity's decay rate. Cell failures are kept in the row.
pub fn gate_sweep(
    base: &ValidatedChain,
    g_over_gamma: &[f64],
    scenarios: &[DetuningScenario],
    carrier: f64,
) -> Vec<GateSweepRow> {
    let gamma = base.reference_decay();
    let cells: Vec<(f64, &DetuningScenario)> = scenarios
        .iter()
        .flat_map(|s| g_over_gamma.iter().map(move |g| (*g, s)))
        .collect();
    cells
        .into_par_iter()
        .map(|(ratio, scenario)| GateSweepRow {
            g_over_gamma: ratio,
            scenario_id: scenario.id.clone(),
            result: scenario
                .apply(base, Some(ratio * gamma))
                .and_then(|chain| evaluate_gate(&chain, carrier)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_config, ChainConfig, SubsystemParams, WaveguideLink};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_qubit_chain(g: f64) -> ValidatedChain {
        let sub = SubsystemParams::empty(0.0, 1.0, 50.0).with_dot(0.0, g, 0.0, 1.0);
        validate_config(
            &ChainConfig::uniform(vec![sub, sub], WaveguideLink::lossless(20.0 * PI))
                .with_mirror(MirrorTermination::new(0.95, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn ideal_pattern_is_perfect() {
        let (f, p) = fidelity_and_loss(&[c(-1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        assert!(p.abs() < 1e-15);
    }

    #[test]
    fn uniform_pattern_gives_quarter() {
        let (f, p) = fidelity_and_loss(&[c(-1.0, 0.0); 4]).unwrap();
        assert!((f - 0.25).abs() < 1e-15);
        assert!(p.abs() < 1e-15);
    }

    #[test]
    fn uniform_damping_is_conditionally_perfect() {
        let amps: Vec<_> = [-1.0, -1.0, -1.0, 1.0].iter().map(|x| c(0.9 * x, 0.0)).collect();
        let (f, p) = fidelity_and_loss(&amps).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        assert!((p - 0.19).abs() < 1e-15);
    }

    #[test]
    fn degenerate_amplitudes_are_errors() {
        assert_eq!(fidelity_and_loss(&[c(0.0, 0.0); 4]), Err(GateError::AllAmplitudesZero));
        assert_eq!(
            fidelity_and_loss(&[c(1.0, 0.0); 3]),
            Err(GateError::InvalidAmplitudeCount(3))
        );
    }

    #[test]
    fn configuration_order_puts_all_g_last() {
        let labels: Vec<_> = configurations(&two_qubit_chain(10.0))
            .unwrap()
            .iter()
            .map(QubitConfiguration::label)
            .collect();
        assert_eq!(labels, vec!["rr", "rg", "gr", "gg"]);
    }

    #[test]
    fn configured_chain_rules() {
        let base = two_qubit_chain(10.0);
        let gg = QubitConfiguration(vec![QubitState::G, QubitState::G]);
        assert_eq!(configured_chain(&base, &gg).unwrap(), base);

        let rg = QubitConfiguration(vec![QubitState::R, QubitState::G]);
        let chain = configured_chain(&base, &rg).unwrap();
        assert_eq!(chain.subsystems()[0].g, 0.0);
        assert_eq!(chain.subsystems()[1].g, 10.0);

        let rr = QubitConfiguration(vec![QubitState::R, QubitState::R]);
        let chain = configured_chain(&base, &rr).unwrap();
        assert!(chain.subsystems().iter().all(|s| s.g == 0.0));

        let short = QubitConfiguration(vec![QubitState::R]);
        assert_eq!(
            configured_chain(&base, &short),
            Err(GateError::LengthMismatch {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn empty_cavities_reflect_almost_perfectly() {
        let base = two_qubit_chain(60.0);
        let amps = gate_amplitudes(&base, DEFAULT_CARRIER, base.mirror().unwrap()).unwrap();
        let (q, rr) = &amps[0];
        assert_eq!(q.label(), "rr");
        assert!((rr + 1.0).norm() < 0.1);
    }

    #[test]
    fn removing_the_mirror_gives_open_reflection() {
        let base = two_qubit_chain(30.0);
        let amps = gate_amplitudes(&base, -1.0, &MirrorTermination::new(0.0, 0.7)).unwrap();
        for (q, lambda) in amps {
            let chain = configured_chain(&base, &q).unwrap();
            let m = cascade(&chain, -1.0).unwrap();
            let r = crate::transfer::scattering(&m).unwrap().r;
            assert!((lambda - r).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_coupling_degrades_to_quarter() {
        let result = evaluate_gate(&two_qubit_chain(0.0), DEFAULT_CARRIER).unwrap();
        assert!((result.fidelity - 0.25).abs() < 1e-12);
    }

    #[test]
    fn calibration_needs_a_mirror() {
        let sub = SubsystemParams::empty(0.0, 1.0, 50.0).with_dot(0.0, 5.0, 0.0, 1.0);
        let chain = validate_config(&ChainConfig::uniform(vec![sub], WaveguideLink::lossless(0.0)))
            .unwrap();
        assert_eq!(calibrate_mirror_phase(&chain, 0.0), Err(GateError::MissingMirror));
    }

    #[test]
    fn scenario_shifts_cavity_and_dot() {
        let base = two_qubit_chain(10.0);
        let scenario = DetuningScenario {
            id: "x".into(),
            cavity_detunings: vec![0.0, 3.0],
            qd_detunings: vec![0.5, 1.0],
        };
        let chain = scenario.apply(&base, Some(7.0)).unwrap();
        let s = chain.subsystems();
        assert_eq!(s[1].omega_c, 3.0);
        assert_eq!(s[1].omega_r, Some(2.0));
        assert_eq!(s[0].omega_r, Some(-0.5));
        assert!(s.iter().all(|x| x.g == 7.0));

        let bad = DetuningScenario {
            id: "bad".into(),
            cavity_detunings: vec![1.0],
            qd_detunings: vec![],
        };
        assert!(matches!(bad.apply(&base, None), Err(GateError::ScenarioLength { .. })));
    }
}
