//! 2x2 transfer matrices for cavity-QD subsystems and waveguide links.
//!
//! A matrix maps the field pair at the left ports of an element,
//! `(a_in, a_out)`, to the pair at its right ports, `(b_in, b_out)`.
//! Cascading is plain matrix multiplication with the leftmost element
//! applied first (rightmost factor).

use std::ops::Mul;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{ResolvedLink, Subsystem, ValidatedChain};

/// Absolute threshold, in κ₀ units, below which a denominator is a pole.
pub const SINGULARITY_THRESHOLD: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum TransferError {
    #[error("lossless dot driven on resonance (subsystem {subsystem:?})")]
    DivisionSingularity { subsystem: Option<usize> },
    #[error("transfer matrix pole: alpha + kappa1 - Gamma vanishes (subsystem {subsystem:?})")]
    DenominatorSingularity { subsystem: Option<usize> },
    #[error("M12 vanishes; open-chain scattering undefined")]
    TransparencySingularity,
    #[error("M12 - rho*M22 vanishes; terminated reflection undefined")]
    TerminationSingularity,
}

impl TransferError {
    fn at(self, index: usize) -> Self {
        match self {
            Self::DivisionSingularity { .. } => Self::DivisionSingularity {
                subsystem: Some(index),
            },
            Self::DenominatorSingularity { .. } => Self::DenominatorSingularity {
                subsystem: Some(index),
            },
            other => other,
        }
    }
}

/// 2x2 complex transfer matrix.
///
/// The determinant is carried alongside the entries and multiplied through
/// products, so elements with a known determinant keep it exact instead of
/// recomputing it from cancelling entry products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    det: Complex64,
}

impl TransferMatrix {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self {
            m11,
            m12,
            m21,
            m22,
            det: m11 * m22 - m12 * m21,
        }
    }

    fn with_determinant(entries: [Complex64; 4], det: Complex64) -> Self {
        let [m11, m12, m21, m22] = entries;
        Self {
            m11,
            m12,
            m21,
            m22,
            det,
        }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::with_determinant([one, zero, zero, one], one)
    }

    /// Determinant tracked through construction and products.
    pub fn determinant(&self) -> Complex64 {
        self.det
    }

    /// Determinant recomputed from the entries.
    pub fn entry_determinant(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, left: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m11 * left[0] + self.m12 * left[1],
            self.m21 * left[0] + self.m22 * left[1],
        ]
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix::with_determinant(
            [
                self.m11 * rhs.m11 + self.m12 * rhs.m21,
                self.m11 * rhs.m12 + self.m12 * rhs.m22,
                self.m21 * rhs.m11 + self.m22 * rhs.m21,
                self.m21 * rhs.m12 + self.m22 * rhs.m22,
            ],
            self.det * rhs.det,
        )
    }
}

/// Reflection `r = a_out⁽¹⁾/a_in⁽¹⁾` and transmission `t = b_out⁽ᴺ⁾/a_in⁽¹⁾`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringPair {
    pub r: Complex64,
    pub t: Complex64,
}

impl ScatteringPair {
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// Power not returned in either port.
    pub fn loss(&self) -> f64 {
        1.0 - self.reflectance() - self.transmittance()
    }
}

/// α = iΔ_c + g²/(iΔ_r − γ).
pub fn subsystem_alpha(p: &Subsystem, omega: f64) -> Result<Complex64, TransferError> {
    let cavity = I * (omega - p.omega_c);
    match p.omega_r {
        Some(omega_r) if p.g > 0.0 => {
            let dipole = Complex64::new(-p.gamma, omega - omega_r);
            if dipole.norm() < SINGULARITY_THRESHOLD {
                return Err(TransferError::DivisionSingularity { subsystem: None });
            }
            Ok(cavity + p.g * p.g / dipole)
        }
        _ => Ok(cavity),
    }
}

pub fn subsystem_matrix(p: &Subsystem, omega: f64) -> Result<TransferMatrix, TransferError> {
    let alpha = subsystem_alpha(p, omega)?;
    let k1 = p.kappa1;
    let beta = alpha - p.cavity_decay;
    let denom = beta + k1;
    if denom.norm() < SINGULARITY_THRESHOLD {
        return Err(TransferError::DenominatorSingularity { subsystem: None });
    }
    let scale = denom.inv();
    Ok(TransferMatrix::with_determinant(
        [
            scale * (-k1),
            scale * beta,
            scale * (beta + 2.0 * k1),
            scale * k1,
        ],
        Complex64::new(-1.0, 0.0),
    ))
}

/// Anti-diagonal link matrix from `a_in⁽ʲ⁺¹⁾ = τe^{iθ} b_out⁽ʲ⁾` and
/// `b_in⁽ʲ⁾ = τe^{iθ} a_out⁽ʲ⁺¹⁾`.
pub fn waveguide_matrix(link: &ResolvedLink) -> TransferMatrix {
    let zero = Complex64::new(0.0, 0.0);
    let forward = Complex64::from_polar(link.transmission, link.theta);
    let backward = Complex64::from_polar(1.0 / link.transmission, -link.theta);
    TransferMatrix::with_determinant([zero, forward, backward, zero], Complex64::new(-1.0, 0.0))
}

/// Whole-chain matrix `T_N · T₀ · … · T₀ · T₁` at detuning `omega`.
pub fn cascade(chain: &ValidatedChain, omega: f64) -> Result<TransferMatrix, TransferError> {
    let subsystems = chain.subsystems();
    let mut total = subsystem_matrix(&subsystems[0], omega).map_err(|e| e.at(0))?;
    for (index, (sub, link)) in subsystems[1..].iter().zip(chain.links()).enumerate() {
        let cell = subsystem_matrix(sub, omega).map_err(|e| e.at(index + 1))?;
        total = cell * waveguide_matrix(link) * total;
    }
    Ok(total)
}

/// Open-chain amplitudes, imposing `b_in⁽ᴺ⁾ = 0`.
pub fn scattering(m: &TransferMatrix) -> Result<ScatteringPair, TransferError> {
    if m.m12.norm() < SINGULARITY_THRESHOLD {
        return Err(TransferError::TransparencySingularity);
    }
    let r = -m.m11 / m.m12;
    let t = -m.determinant() / m.m12;
    Ok(ScatteringPair { r, t })
}

/// Reflection of the chain terminated by `b_in⁽ᴺ⁾ = ρ·b_out⁽ᴺ⁾`.
pub fn terminated_reflection(m: &TransferMatrix, rho: Complex64) -> Result<Complex64, TransferError> {
    let denom = m.m12 - rho * m.m22;
    if denom.norm() < SINGULARITY_THRESHOLD {
        return Err(TransferError::TerminationSingularity);
    }
    Ok(-(m.m11 - rho * m.m21) / denom)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_relative_eq;

    use super::*;
    use crate::model::{validate_config, ChainConfig, SubsystemParams, WaveguideLink};

    fn chain(subsystems: Vec<SubsystemParams>, theta: f64) -> ValidatedChain {
        validate_config(&ChainConfig::uniform(subsystems, WaveguideLink::lossless(theta))).unwrap()
    }

    fn empty_resonant() -> Subsystem {
        Subsystem::resolve(&SubsystemParams::empty(0.0, 1.0, 50.0), 0.0)
    }

    #[test]
    fn alpha_of_empty_cavity_is_detuning() {
        let a = subsystem_alpha(&empty_resonant(), 0.3).unwrap();
        assert_eq!(a, Complex64::new(0.0, 0.3));
    }

    #[test]
    fn alpha_resonant_dot() {
        let p = SubsystemParams::empty(0.0, 1.0, 50.0).with_dot(0.0, 25.25, 0.0, 1.0);
        let a = subsystem_alpha(&Subsystem::resolve(&p, 0.0), 0.0).unwrap();
        assert_relative_eq!(a.re, -637.5625, max_relative = 1e-15);
        assert_eq!(a.im, 0.0);
    }

    #[test]
    fn alpha_dot_without_coupling_is_pure_detuning() {
        let p = SubsystemParams::empty(0.4, 1.0, 50.0).with_dot(0.4, 0.0, 0.0, 1.0);
        let a = subsystem_alpha(&Subsystem::resolve(&p, 0.0), 1.1).unwrap();
        assert_eq!(a.re, 0.0);
        assert_relative_eq!(a.im, 0.7, max_relative = 1e-15);
    }

    #[test]
    fn lossless_resonant_dot_is_singular() {
        let p = SubsystemParams::empty(0.0, 1.0, 50.0).with_dot(0.0, 2.0, 0.0, 0.0);
        assert_eq!(
            subsystem_alpha(&Subsystem::resolve(&p, 0.0), 0.0),
            Err(TransferError::DivisionSingularity { subsystem: None })
        );
    }

    #[test]
    fn pole_of_decoupled_cavity() {
        let p = SubsystemParams::empty(0.0, 0.0, 0.0);
        assert!(matches!(
            subsystem_matrix(&Subsystem::resolve(&p, 0.0), 0.0),
            Err(TransferError::DenominatorSingularity { .. })
        ));
    }

    #[test]
    fn waveguide_forms() {
        let swap = waveguide_matrix(&ResolvedLink {
            theta: 0.0,
            transmission: 1.0,
        });
        assert_eq!(swap.m12, Complex64::new(1.0, 0.0));
        assert_eq!(swap.m21, Complex64::new(1.0, 0.0));
        assert_eq!(swap.m11, Complex64::new(0.0, 0.0));

        let quarter = waveguide_matrix(&ResolvedLink {
            theta: PI / 2.0,
            transmission: 1.0,
        });
        assert!((quarter.m12 - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((quarter.m21 - Complex64::new(0.0, -1.0)).norm() < 1e-15);

        let long = waveguide_matrix(&ResolvedLink {
            theta: 20.0 * PI,
            transmission: 1.0,
        });
        assert!((long.m12 - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!((long.m21 - Complex64::new(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn single_empty_cavity_closed_form() {
        let c = chain(vec![SubsystemParams::empty(0.0, 1.0, 50.0)], 0.0);
        let s = scattering(&cascade(&c, 0.0).unwrap()).unwrap();
        assert_relative_eq!(s.r.re, -50.0 / 50.5, max_relative = 1e-14);
        assert_relative_eq!(s.t.re, 0.5 / 50.5, max_relative = 1e-14);
        assert!(s.r.im.abs() < 1e-16 && s.t.im.abs() < 1e-16);
    }

    #[test]
    fn single_cavity_with_resonant_dot() {
        let g = 25.25;
        let p = SubsystemParams::empty(0.0, 1.0, 50.0).with_dot(0.0, g, 0.0, 1.0);
        let s = scattering(&cascade(&chain(vec![p], 0.0), 0.0).unwrap()).unwrap();
        // t = (α − Γ + κ₁)/(α − Γ) with α = −637.5625.
        let expected = (-637.5625 - 50.5 + 50.0) / (-637.5625 - 50.5);
        assert_relative_eq!(s.t.re, expected, max_relative = 1e-14);
        assert!((s.t.re - 0.92733).abs() < 1e-5);
    }

    #[test]
    fn two_resonant_empty_cavities() {
        let c = chain(
            vec![
                SubsystemParams::empty(0.0, 1.0, 50.0),
                SubsystemParams::empty(0.0, 1.0, 50.0),
            ],
            20.0 * PI,
        );
        let m = cascade(&c, 0.0).unwrap();
        let beta = -50.5;
        let d = beta + 50.0;
        let m12 = (beta * beta - 2500.0) / (d * d);
        assert_relative_eq!(m.m12.re, m12, max_relative = 1e-12);
        let s = scattering(&m).unwrap();
        assert_relative_eq!(s.t.re, 0.5 / 100.5, max_relative = 1e-12);
    }

    #[test]
    fn single_factor_cascade_is_the_subsystem_matrix() {
        let p = SubsystemParams::empty(0.2, 1.0, 7.0).with_dot(-0.1, 3.0, 0.4, 0.2);
        let c = chain(vec![p], 0.0);
        let direct = subsystem_matrix(&c.subsystems()[0], 0.9).unwrap();
        assert_eq!(cascade(&c, 0.9).unwrap(), direct);
    }

    #[test]
    fn open_mirror_reduces_to_reflection() {
        let p = SubsystemParams::empty(0.2, 1.0, 7.0).with_dot(-0.1, 3.0, 0.4, 0.2);
        let c = chain(vec![p, SubsystemParams::empty(-1.0, 2.0, 9.0)], 1.3);
        let m = cascade(&c, 0.5).unwrap();
        let r = scattering(&m).unwrap().r;
        assert_eq!(terminated_reflection(&m, Complex64::new(0.0, 0.0)).unwrap(), r);
    }

    #[test]
    fn cascade_reports_failing_subsystem() {
        let bad = SubsystemParams::empty(0.0, 1.0, 5.0).with_dot(0.0, 1.0, 0.0, 0.0);
        let c = chain(vec![SubsystemParams::empty(0.0, 1.0, 5.0), bad], 0.0);
        assert_eq!(
            cascade(&c, 0.0),
            Err(TransferError::DivisionSingularity { subsystem: Some(1) })
        );
    }

    #[test]
    fn tracked_and_entry_determinants_agree() {
        let p = SubsystemParams::empty(0.3, 1.0, 12.0).with_dot(0.1, 4.0, 0.2, 0.5);
        let c = chain(vec![p, SubsystemParams::empty(-0.7, 1.5, 20.0), p], 0.9);
        let m = cascade(&c, 0.4).unwrap();
        assert!((m.determinant() + 1.0).norm() < 1e-15);
        assert!((m.entry_determinant() + 1.0).norm() < 1e-10);
    }
}
