//! Frequency sweeps and lineshape analysis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{FrequencyGrid, ValidatedChain};
use crate::transfer::{cascade, scattering, ScatteringPair, TransferError};

/// Largest unwrapped phase step between neighbouring samples that still
/// counts as resolved.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

/// Feature prominence default, in transmittance units.
pub const DEFAULT_PROMINENCE: f64 = 0.05;

/// Two mode frequencies closer than this (κ₀ units) are treated as resonant.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("phase step {step:.3} rad at omega = {omega} exceeds {max:.3} rad; refine the grid")]
    PhaseUnwrapFailure { omega: f64, step: f64, max: f64 },
    #[error("need at least 2 valid samples, have {0}")]
    TooFewSamples(usize),
    #[error("subsystem {index} has an off-resonant dot; dressed-mode prediction does not apply")]
    NotApplicable { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Transmission,
    Reflection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub r: Complex64,
    pub t: Complex64,
    /// Unwrapped arg t.
    pub phase_t: f64,
    /// Unwrapped arg r.
    pub phase_r: f64,
}

impl SpectrumPoint {
    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn loss(&self) -> f64 {
        1.0 - self.transmittance() - self.reflectance()
    }

    pub fn phase(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Transmission => self.phase_t,
            Channel::Reflection => self.phase_r,
        }
    }
}

/// Grid point where the transfer representation hit a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedSample {
    pub omega: f64,
    pub error: TransferError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
    pub masked: Vec<MaskedSample>,
    /// Γ of the first subsystem; sets the lifetime unit 1/(2Γ).
    pub reference_decay: f64,
}

impl Spectrum {
    pub fn sample_count(&self) -> usize {
        self.points.len() + self.masked.len()
    }

    pub fn masked_fraction(&self) -> f64 {
        self.masked.len() as f64 / self.sample_count().max(1) as f64
    }

    pub fn transmittance(&self) -> Vec<f64> {
        self.points.iter().map(SpectrumPoint::transmittance).collect()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    /// Transmittance at the sample closest to `omega`.
    pub fn transmittance_near(&self, omega: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
            .map(SpectrumPoint::transmittance)
    }
}

fn wrap_to_pi(x: f64) -> f64 {
    let wrapped = (x + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped == -PI {
        PI
    } else {
        wrapped
    }
}

/// Removes 2π jumps from a sequence of principal-value phases.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut previous: Option<(f64, f64)> = None;
    for &raw in wrapped {
        let value = match previous {
            None => raw,
            Some((prev_raw, prev_unwrapped)) => prev_unwrapped + wrap_to_pi(raw - prev_raw),
        };
        out.push(value);
        previous = Some((raw, value));
    }
    out
}

/// Evaluates the open-chain amplitudes on every grid point.
///
/// Points are computed in parallel but each depends only on its own
/// frequency, so the result does not depend on scheduling.
pub fn sweep(chain: &ValidatedChain, grid: &FrequencyGrid) -> Spectrum {
    let raw: Vec<(f64, Result<ScatteringPair, TransferError>)> = (0..grid.points)
        .into_par_iter()
        .map(|k| {
            let omega = grid.value(k);
            (omega, cascade(chain, omega).and_then(|m| scattering(&m)))
        })
        .collect();

    let mut valid = Vec::with_capacity(raw.len());
    let mut masked = Vec::new();
    for (omega, result) in raw {
        match result {
            Ok(pair) => valid.push((omega, pair)),
            Err(error) => masked.push(MaskedSample { omega, error }),
        }
    }
    let phase_t = unwrap_phase(&valid.iter().map(|(_, s)| s.t.arg()).collect::<Vec<_>>());
    let phase_r = unwrap_phase(&valid.iter().map(|(_, s)| s.r.arg()).collect::<Vec<_>>());
    let points = valid
        .into_iter()
        .zip(phase_t.into_iter().zip(phase_r))
        .map(|((omega, s), (phase_t, phase_r))| SpectrumPoint {
            omega,
            r: s.r,
            t: s.t,
            phase_t,
            phase_r,
        })
        .collect();

    Spectrum {
        points,
        masked,
        reference_decay: chain.reference_decay(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDelay {
    pub channel: Channel,
    pub omega: Vec<f64>,
    pub phase: Vec<f64>,
    /// dφ/dω in units of 1/κ₀.
    pub tau: Vec<f64>,
    pub tau_over_lifetime: Vec<f64>,
    /// Cavity lifetime 1/(2Γ).
    pub lifetime: f64,
}

impl GroupDelay {
    /// Sample with the largest |τ|, as `(omega, tau)`.
    pub fn peak(&self) -> (f64, f64) {
        self.omega
            .iter()
            .zip(&self.tau)
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(w, t)| (*w, *t))
            .unwrap_or((f64::NAN, f64::NAN))
    }

    /// Delay at the sample closest to `omega`.
    pub fn at(&self, omega: f64) -> f64 {
        let k = self
            .omega
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - omega).abs().total_cmp(&(b.1 - omega).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.tau[k]
    }
}

/// Group delay τ = dφ/dω by central differences, one-sided at the ends.
pub fn group_delay(spec: &Spectrum, channel: Channel) -> Result<GroupDelay, SpectrumError> {
    let n = spec.points.len();
    if n < 2 {
        return Err(SpectrumError::TooFewSamples(n));
    }
    let omega = spec.omegas();
    let phase: Vec<f64> = spec.points.iter().map(|p| p.phase(channel)).collect();
    for k in 1..n {
        let step = (phase[k] - phase[k - 1]).abs();
        if step > MAX_PHASE_STEP {
            return Err(SpectrumError::PhaseUnwrapFailure {
                omega: omega[k],
                step,
                max: MAX_PHASE_STEP,
            });
        }
    }
    let tau: Vec<f64> = (0..n)
        .map(|k| {
            let (lo, hi) = match k {
                0 => (0, 1),
                k if k == n - 1 => (n - 2, n - 1),
                k => (k - 1, k + 1),
            };
            (phase[hi] - phase[lo]) / (omega[hi] - omega[lo])
        })
        .collect();
    let lifetime = 1.0 / (2.0 * spec.reference_decay);
    let tau_over_lifetime = tau.iter().map(|t| t / lifetime).collect();
    Ok(GroupDelay {
        channel,
        omega,
        phase,
        tau,
        tau_over_lifetime,
        lifetime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Peak,
    Dip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralFeature {
    pub kind: FeatureKind,
    pub omega_center: f64,
    /// Transmittance at the refined center.
    pub height: f64,
    pub prominence: f64,
    /// Full width at half prominence.
    pub width_fwhm: f64,
}

fn prominence(y: &[f64], k: usize) -> f64 {
    let level = y[k];
    let mut left_min = level;
    for &v in y[..k].iter().rev() {
        if v > level {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = level;
    for &v in &y[k + 1..] {
        if v > level {
            break;
        }
        right_min = right_min.min(v);
    }
    level - left_min.max(right_min)
}

fn crossing(x: &[f64], y: &[f64], inside: usize, outside: usize, level: f64) -> f64 {
    let (y0, y1) = (y[inside], y[outside]);
    if y1 == y0 {
        return x[outside];
    }
    x[inside] + (level - y0) * (x[outside] - x[inside]) / (y1 - y0)
}

fn half_width(x: &[f64], y: &[f64], k: usize, level: f64) -> f64 {
    let mut left = x[0];
    for i in (0..k).rev() {
        if y[i] <= level {
            left = crossing(x, y, i + 1, i, level);
            break;
        }
    }
    let mut right = x[x.len() - 1];
    for i in k + 1..y.len() {
        if y[i] <= level {
            right = crossing(x, y, i - 1, i, level);
            break;
        }
    }
    right - left
}

/// Maxima of `y` above `min_prominence`, as (refined x, refined y,
/// prominence, width).
fn maxima(x: &[f64], y: &[f64], min_prominence: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    for k in 1..y.len().saturating_sub(1) {
        if !(y[k] > y[k - 1] && y[k] > y[k + 1]) {
            continue;
        }
        let prom = prominence(y, k);
        if prom < min_prominence {
            continue;
        }
        let curvature = y[k - 1] - 2.0 * y[k] + y[k + 1];
        let h = 0.5 * (x[k + 1] - x[k - 1]);
        let (center, value) = if curvature < 0.0 {
            let offset = 0.5 * (y[k - 1] - y[k + 1]) / curvature;
            (
                x[k] + offset * h,
                y[k] - 0.125 * (y[k - 1] - y[k + 1]).powi(2) / curvature,
            )
        } else {
            (x[k], y[k])
        };
        let width = half_width(x, y, k, y[k] - 0.5 * prom);
        out.push((center, value, prom, width));
    }
    out
}

/// Peaks and dips of the transmittance with at least `min_prominence`.
pub fn find_features(spec: &Spectrum, min_prominence: f64) -> Vec<SpectralFeature> {
    let x = spec.omegas();
    let y = spec.transmittance();
    let mut features: Vec<SpectralFeature> = maxima(&x, &y, min_prominence)
        .into_iter()
        .map(|(omega_center, height, prominence, width_fwhm)| SpectralFeature {
            kind: FeatureKind::Peak,
            omega_center,
            height,
            prominence,
            width_fwhm,
        })
        .collect();
    let negated: Vec<f64> = y.iter().map(|v| -v).collect();
    features.extend(maxima(&x, &negated, min_prominence).into_iter().map(
        |(omega_center, height, prominence, width_fwhm)| SpectralFeature {
            kind: FeatureKind::Dip,
            omega_center,
            height: -height,
            prominence,
            width_fwhm,
        },
    ));
    features.sort_by(|a, b| a.omega_center.total_cmp(&b.omega_center));
    features
}

/// Interval between two non-resonant modes of neighbouring subsystems in
/// which an EIT-like transmission peak is expected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakWindow {
    pub subsystems: (usize, usize),
    pub lower: f64,
    pub upper: f64,
    pub center: f64,
}

impl PeakWindow {
    pub fn contains(&self, omega: f64, margin: f64) -> bool {
        omega >= self.lower - margin && omega <= self.upper + margin
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DressedModes {
    /// Mode frequencies per subsystem: `ω_c ± g` with a coupled dot,
    /// `ω_c` otherwise.
    pub modes: Vec<Vec<f64>>,
    pub windows: Vec<PeakWindow>,
}

impl DressedModes {
    pub fn predicted_peaks(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.center).collect()
    }
}

/// Dressed-mode picture of the chain.
///
/// Every pair of modes taken from adjacent subsystems, at least one of which
/// carries a coupled dot, opens a window unless the two modes are resonant
/// or a resonant pair of the same two subsystems sits strictly inside it.
pub fn dressed_mode_positions(chain: &ValidatedChain) -> Result<DressedModes, SpectrumError> {
    let mut modes = Vec::with_capacity(chain.len());
    for (index, sub) in chain.subsystems().iter().enumerate() {
        if sub.dot_coupled() {
            let omega_r = sub.omega_r.unwrap_or(sub.omega_c);
            if (omega_r - sub.omega_c).abs() > RESONANCE_TOLERANCE {
                return Err(SpectrumError::NotApplicable { index });
            }
            modes.push(vec![sub.omega_c - sub.g, sub.omega_c + sub.g]);
        } else {
            modes.push(vec![sub.omega_c]);
        }
    }

    let mut windows = Vec::new();
    let subs = chain.subsystems();
    for j in 0..chain.len().saturating_sub(1) {
        if !(subs[j].dot_coupled() || subs[j + 1].dot_coupled()) {
            continue;
        }
        let resonant: Vec<f64> = modes[j]
            .iter()
            .flat_map(|a| modes[j + 1].iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| (a - b).abs() <= RESONANCE_TOLERANCE)
            .map(|(a, _)| a)
            .collect();
        for &a in &modes[j] {
            for &b in &modes[j + 1] {
                if (a - b).abs() <= RESONANCE_TOLERANCE {
                    continue;
                }
                let (lower, upper) = (a.min(b), a.max(b));
                let blocked = resonant
                    .iter()
                    .any(|&w| w > lower + RESONANCE_TOLERANCE && w < upper - RESONANCE_TOLERANCE);
                if !blocked {
                    windows.push(PeakWindow {
                        subsystems: (j, j + 1),
                        lower,
                        upper,
                        center: 0.5 * (lower + upper),
                    });
                }
            }
        }
    }
    windows.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(DressedModes { modes, windows })
}
