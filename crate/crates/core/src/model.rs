//! Chain description, unit normalization and validation.
//!
//! A [`ChainConfig`] is the user-facing description of the device. It is
//! turned into a [`ValidatedChain`] by [`validate_config`], which rescales
//! everything to units of the first cavity's intrinsic decay rate, centers
//! frequencies on the reference frequency and precomputes the derived rates
//! used by the scattering routines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("chain has no subsystems")]
    EmptyChain,
    #[error("subsystems[{index}].{field} must be non-negative, got {value}")]
    NegativeRate {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{field} at index {index} is not finite")]
    NonFinite { field: &'static str, index: usize },
    #[error("links: expected {expected} entries for {subsystems} subsystems, got {found}")]
    LinkCountMismatch {
        subsystems: usize,
        expected: usize,
        found: usize,
    },
    #[error("{field} at index {index} must lie in [0, 1), got {value}")]
    LossOutOfRange {
        field: &'static str,
        index: usize,
        value: f64,
    },
    #[error("mirror.reflectivity must lie in [0, 1], got {0}")]
    ReflectivityOutOfRange(f64),
    #[error("subsystems[{index}] has g > 0 but no omega_r")]
    MissingDotFrequency { index: usize },
    #[error("subsystems[0].kappa0 is zero; cannot normalize to kappa0 units")]
    ZeroKappa0,
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
}

/// One nanocavity and its optional quantum dot.
///
/// `g = 0` encodes a cavity without a dot, or a dot parked in the uncoupled
/// ground state; either way the dipole drops out of the response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsystemParams {
    pub omega_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r: Option<f64>,
    pub kappa0: f64,
    pub kappa1: f64,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub gamma_s: f64,
    #[serde(default)]
    pub gamma_p: f64,
}

impl SubsystemParams {
    pub fn empty(omega_c: f64, kappa0: f64, kappa1: f64) -> Self {
        Self {
            omega_c,
            omega_r: None,
            kappa0,
            kappa1,
            g: 0.0,
            gamma_s: 0.0,
            gamma_p: 0.0,
        }
    }

    /// Adds a two-level dot with transition `omega_r`, coupling `g` and
    /// spontaneous/pure-dephasing rates.
    pub fn with_dot(mut self, omega_r: f64, g: f64, gamma_s: f64, gamma_p: f64) -> Self {
        self.omega_r = Some(omega_r);
        self.g = g;
        self.gamma_s = gamma_s;
        self.gamma_p = gamma_p;
        self
    }

    /// Γ = (κ₀ + 2κ₁)/2, the cavity field decay rate.
    pub fn cavity_decay(&self) -> f64 {
        (self.kappa0 + 2.0 * self.kappa1) / 2.0
    }

    /// γ = γ_s/2 + γ_p, the dipole decoherence rate.
    pub fn dot_decoherence(&self) -> f64 {
        self.gamma_s / 2.0 + self.gamma_p
    }

    pub fn has_dot(&self) -> bool {
        self.omega_r.is_some()
    }

    fn scaled(&self, scale: f64) -> Self {
        Self {
            omega_c: self.omega_c / scale,
            omega_r: self.omega_r.map(|w| w / scale),
            kappa0: self.kappa0 / scale,
            kappa1: self.kappa1 / scale,
            g: self.g / scale,
            gamma_s: self.gamma_s / scale,
            gamma_p: self.gamma_p / scale,
        }
    }
}

/// Waveguide section between two neighbouring cavities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideLink {
    pub theta: f64,
    #[serde(default)]
    pub power_loss: f64,
}

impl WaveguideLink {
    pub fn lossless(theta: f64) -> Self {
        Self {
            theta,
            power_loss: 0.0,
        }
    }

    /// Single-pass field transmission τ = sqrt(1 - loss).
    pub fn amplitude_transmission(&self) -> f64 {
        (1.0 - self.power_loss).sqrt()
    }
}

/// Reflecting element after the last cavity.
///
/// `phase` is the one-way phase between the last cavity and the mirror, so
/// the round trip contributes `exp(2i·phase)`. `segment_loss` is the
/// single-pass power loss of that waveguide segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorTermination {
    pub reflectivity: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub segment_loss: f64,
}

impl MirrorTermination {
    pub fn new(reflectivity: f64, phase: f64) -> Self {
        Self {
            reflectivity,
            phase,
            segment_loss: 0.0,
        }
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self { phase, ..self }
    }

    /// ρ = sqrt(R)·(1 - segment_loss)·exp(2i·phase), the ratio b_in/b_out at
    /// the last cavity's right port.
    pub fn reflection_factor(&self) -> Complex64 {
        let magnitude = self.reflectivity.sqrt() * (1.0 - self.segment_loss);
        Complex64::from_polar(magnitude, 2.0 * self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    #[serde(rename = "kappa0")]
    Kappa0,
    #[serde(rename = "absolute")]
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub units: FrequencyUnit,
    #[serde(default)]
    pub reference_frequency: f64,
    pub subsystems: Vec<SubsystemParams>,
    #[serde(default)]
    pub links: Vec<WaveguideLink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror: Option<MirrorTermination>,
}

impl ChainConfig {
    /// Chain in κ₀ units with every link identical.
    pub fn uniform(subsystems: Vec<SubsystemParams>, link: WaveguideLink) -> Self {
        let links = vec![link; subsystems.len().saturating_sub(1)];
        Self {
            units: FrequencyUnit::Kappa0,
            reference_frequency: 0.0,
            subsystems,
            links,
            mirror: None,
        }
    }

    pub fn with_mirror(mut self, mirror: MirrorTermination) -> Self {
        self.mirror = Some(mirror);
        self
    }

    /// Factor that converts this config's frequencies to κ₀ units.
    pub fn kappa0_scale(&self) -> Option<f64> {
        self.subsystems
            .first()
            .map(|s| s.kappa0)
            .filter(|k| *k > 0.0 && k.is_finite())
    }
}

/// Uniform grid with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self, ModelError> {
        if points < 2 {
            return Err(ModelError::InvalidGrid(format!(
                "need at least 2 points, got {points}"
            )));
        }
        if !(start.is_finite() && stop.is_finite()) || stop <= start {
            return Err(ModelError::InvalidGrid(format!(
                "need finite start < stop, got [{start}, {stop}]"
            )));
        }
        Ok(Self {
            start,
            stop,
            points,
        })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            self.stop
        } else {
            self.start + k as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }
}

/// Rescales all frequencies and rates by κ₀ of the first subsystem.
///
/// Exact no-op on a config that is already in κ₀ units with κ₀ = 1.
pub fn normalize_units(config: &ChainConfig) -> Result<ChainConfig, ModelError> {
    let first = config.subsystems.first().ok_or(ModelError::EmptyChain)?;
    if first.kappa0 < 0.0 {
        return Err(ModelError::NegativeRate {
            field: "kappa0",
            index: 0,
            value: first.kappa0,
        });
    }
    if first.kappa0 == 0.0 {
        return Err(ModelError::ZeroKappa0);
    }
    let scale = first.kappa0;
    Ok(ChainConfig {
        units: FrequencyUnit::Kappa0,
        reference_frequency: config.reference_frequency / scale,
        subsystems: config.subsystems.iter().map(|s| s.scaled(scale)).collect(),
        links: config.links.clone(),
        mirror: config.mirror,
    })
}

/// Cavity-QD subsystem in κ₀ units with frequencies measured from the
/// reference frequency and derived rates precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subsystem {
    pub omega_c: f64,
    pub omega_r: Option<f64>,
    pub kappa0: f64,
    pub kappa1: f64,
    pub g: f64,
    /// Dipole decoherence γ.
    pub gamma: f64,
    /// Cavity field decay Γ.
    pub cavity_decay: f64,
}

impl Subsystem {
    pub fn resolve(params: &SubsystemParams, reference: f64) -> Self {
        Self {
            omega_c: params.omega_c - reference,
            omega_r: params.omega_r.map(|w| w - reference),
            kappa0: params.kappa0,
            kappa1: params.kappa1,
            g: params.g,
            gamma: params.dot_decoherence(),
            cavity_decay: params.cavity_decay(),
        }
    }

    /// True when the dipole contributes to the cavity response.
    pub fn dot_coupled(&self) -> bool {
        self.g > 0.0 && self.omega_r.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedLink {
    pub theta: f64,
    pub transmission: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedChain {
    config: ChainConfig,
    subsystems: Vec<Subsystem>,
    links: Vec<ResolvedLink>,
}

impl ValidatedChain {
    /// The normalized config this chain was built from.
    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn links(&self) -> &[ResolvedLink] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn mirror(&self) -> Option<&MirrorTermination> {
        self.config.mirror.as_ref()
    }

    /// ρ of the terminating mirror, if any.
    pub fn mirror_factor(&self) -> Option<Complex64> {
        self.config.mirror.map(|m| m.reflection_factor())
    }

    /// Γ of the first subsystem, the reference linewidth for reporting.
    pub fn reference_decay(&self) -> f64 {
        self.subsystems[0].cavity_decay
    }

    /// Chain with the subsystems in reverse order and mirror removed.
    pub fn reversed(&self) -> ValidatedChain {
        let mut config = self.config.clone();
        config.subsystems.reverse();
        config.links.reverse();
        config.mirror = None;
        // Units stay tied to the original first cavity.
        Self::resolve(config)
    }

    /// Rebuilds the chain after editing its normalized config.
    pub fn modified<F>(&self, edit: F) -> Result<ValidatedChain, ModelError>
    where
        F: FnOnce(&mut ChainConfig),
    {
        let mut config = self.config.clone();
        edit(&mut config);
        check_structure(&config)?;
        Ok(Self::resolve(config))
    }

    fn resolve(config: ChainConfig) -> Self {
        let reference = config.reference_frequency;
        let subsystems = config
            .subsystems
            .iter()
            .map(|p| Subsystem::resolve(p, reference))
            .collect();
        let links = config
            .links
            .iter()
            .map(|l| ResolvedLink {
                theta: l.theta,
                transmission: l.amplitude_transmission(),
            })
            .collect();
        Self {
            config,
            subsystems,
            links,
        }
    }
}

fn check_finite(value: f64, field: &'static str, index: usize) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFinite { field, index })
    }
}

fn check_rate(value: f64, field: &'static str, index: usize) -> Result<(), ModelError> {
    check_finite(value, field, index)?;
    if value < 0.0 {
        return Err(ModelError::NegativeRate {
            field,
            index,
            value,
        });
    }
    Ok(())
}

fn check_loss(value: f64, field: &'static str, index: usize) -> Result<(), ModelError> {
    check_finite(value, field, index)?;
    if !(0.0..1.0).contains(&value) {
        return Err(ModelError::LossOutOfRange {
            field,
            index,
            value,
        });
    }
    Ok(())
}

fn check_structure(config: &ChainConfig) -> Result<(), ModelError> {
    let n = config.subsystems.len();
    if n == 0 {
        return Err(ModelError::EmptyChain);
    }
    if config.links.len() != n - 1 {
        return Err(ModelError::LinkCountMismatch {
            subsystems: n,
            expected: n - 1,
            found: config.links.len(),
        });
    }
    check_finite(config.reference_frequency, "reference_frequency", 0)?;
    for (index, s) in config.subsystems.iter().enumerate() {
        check_finite(s.omega_c, "omega_c", index)?;
        if let Some(w) = s.omega_r {
            check_finite(w, "omega_r", index)?;
        }
        check_rate(s.kappa0, "kappa0", index)?;
        check_rate(s.kappa1, "kappa1", index)?;
        check_rate(s.g, "g", index)?;
        check_rate(s.gamma_s, "gamma_s", index)?;
        check_rate(s.gamma_p, "gamma_p", index)?;
        if s.g > 0.0 && s.omega_r.is_none() {
            return Err(ModelError::MissingDotFrequency { index });
        }
    }
    for (index, l) in config.links.iter().enumerate() {
        check_finite(l.theta, "links.theta", index)?;
        check_loss(l.power_loss, "links.power_loss", index)?;
    }
    if let Some(m) = &config.mirror {
        check_finite(m.phase, "mirror.phase", 0)?;
        if !m.reflectivity.is_finite() || !(0.0..=1.0).contains(&m.reflectivity) {
            return Err(ModelError::ReflectivityOutOfRange(m.reflectivity));
        }
        check_loss(m.segment_loss, "mirror.segment_loss", 0)?;
    }
    Ok(())
}

/// Checks a raw config, converts it to κ₀ units and resolves derived rates.
///
/// A config already tagged as κ₀ units whose first cavity is lossless
/// (κ₀ = 0) is taken as-is: its numbers are read against a nominal κ₀.
pub fn validate_config(raw: &ChainConfig) -> Result<ValidatedChain, ModelError> {
    check_structure(raw)?;
    let normalized = match raw.units {
        FrequencyUnit::Kappa0 if raw.subsystems[0].kappa0 == 0.0 => raw.clone(),
        _ => normalize_units(raw)?,
    };
    Ok(ValidatedChain::resolve(normalized))
}
