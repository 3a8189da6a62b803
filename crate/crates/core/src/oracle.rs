//! Steady-state scattering solved directly from the linearized equations of
//! motion and the input-output port relations.
//!
//! This shares no arithmetic with [`crate::transfer`]; it exists to check
//! the transfer-matrix cascade. Each subsystem contributes six unknowns
//! `[c, s, a_in, a_out, b_in, b_out]` and the whole chain is solved as one
//! dense linear system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::model::ValidatedChain;
use crate::transfer::ScatteringPair;

const UNKNOWNS_PER_SUBSYSTEM: usize = 6;
const CAVITY: usize = 0;
const DIPOLE: usize = 1;
const A_IN: usize = 2;
const A_OUT: usize = 3;
const B_IN: usize = 4;
const B_OUT: usize = 5;

/// Smallest accepted ratio between LU pivots.
const PIVOT_RATIO_FLOOR: f64 = 1e-15;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum OracleError {
    #[error("steady-state system is singular (pivot ratio {pivot_ratio:e})")]
    SingularSystem { pivot_ratio: f64 },
}

/// Condition at the right end of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Nothing enters from the right: `b_in⁽ᴺ⁾ = 0`.
    Open,
    /// `b_in⁽ᴺ⁾ = ρ·b_out⁽ᴺ⁾`.
    Mirror(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortFields {
    pub a_in: Complex64,
    pub a_out: Complex64,
    pub b_in: Complex64,
    pub b_out: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub cavity: Vec<Complex64>,
    pub dipole: Vec<Complex64>,
    pub ports: Vec<PortFields>,
}

impl SteadyStateSolution {
    pub fn is_finite(&self) -> bool {
        self.cavity
            .iter()
            .chain(&self.dipole)
            .chain(self.ports.iter().flat_map(|p| [&p.a_in, &p.a_out, &p.b_in, &p.b_out]))
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn var(subsystem: usize, field: usize) -> usize {
    subsystem * UNKNOWNS_PER_SUBSYSTEM + field
}

/// Solves for every field amplitude in the chain driven from the left with
/// amplitude `a_in_1` at detuning `omega`.
pub fn steady_state_solve(
    chain: &ValidatedChain,
    omega: f64,
    a_in_1: Complex64,
    boundary: Boundary,
) -> Result<SteadyStateSolution, OracleError> {
    let n = chain.len();
    let size = n * UNKNOWNS_PER_SUBSYSTEM;
    let mut a = DMatrix::<Complex64>::zeros(size, size);
    let mut rhs = DVector::<Complex64>::zeros(size);
    let mut row = 0;

    for (j, sub) in chain.subsystems().iter().enumerate() {
        let drive = I * sub.kappa1.sqrt();

        // 0 = (iΔ_c − Γ)c − i g s + i√κ₁(a_in + b_in)
        a[(row, var(j, CAVITY))] = Complex64::new(-sub.cavity_decay, omega - sub.omega_c);
        a[(row, var(j, A_IN))] = drive;
        a[(row, var(j, B_IN))] = drive;
        if sub.dot_coupled() {
            a[(row, var(j, DIPOLE))] = -I * sub.g;
        }
        row += 1;

        // 0 = (iΔ_r − γ)s − i g c, or s = 0 without a coupled dot
        match sub.omega_r {
            Some(omega_r) if sub.dot_coupled() => {
                a[(row, var(j, DIPOLE))] = Complex64::new(-sub.gamma, omega - omega_r);
                a[(row, var(j, CAVITY))] = -I * sub.g;
            }
            _ => a[(row, var(j, DIPOLE))] = ONE,
        }
        row += 1;

        // b_out = a_in + i√κ₁ c
        a[(row, var(j, B_OUT))] = ONE;
        a[(row, var(j, A_IN))] = -ONE;
        a[(row, var(j, CAVITY))] = -drive;
        row += 1;

        // a_out = b_in + i√κ₁ c
        a[(row, var(j, A_OUT))] = ONE;
        a[(row, var(j, B_IN))] = -ONE;
        a[(row, var(j, CAVITY))] = -drive;
        row += 1;
    }

    for (j, link) in chain.links().iter().enumerate() {
        let hop = Complex64::from_polar(link.transmission, link.theta);
        // a_in⁽ʲ⁺¹⁾ = τe^{iθ} b_out⁽ʲ⁾
        a[(row, var(j + 1, A_IN))] = ONE;
        a[(row, var(j, B_OUT))] = -hop;
        row += 1;
        // b_in⁽ʲ⁾ = τe^{iθ} a_out⁽ʲ⁺¹⁾
        a[(row, var(j, B_IN))] = ONE;
        a[(row, var(j + 1, A_OUT))] = -hop;
        row += 1;
    }

    a[(row, var(0, A_IN))] = ONE;
    rhs[row] = a_in_1;
    row += 1;

    let last = n - 1;
    a[(row, var(last, B_IN))] = ONE;
    if let Boundary::Mirror(rho) = boundary {
        a[(row, var(last, B_OUT))] = -rho;
    }
    row += 1;
    debug_assert_eq!(row, size);

    let lu = a.lu();
    let pivots = lu.u().diagonal();
    let (min_pivot, max_pivot) = pivots
        .iter()
        .map(|p| p.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pivot_ratio = if max_pivot > 0.0 { min_pivot / max_pivot } else { 0.0 };
    if pivot_ratio.is_nan() || pivot_ratio < PIVOT_RATIO_FLOOR {
        return Err(OracleError::SingularSystem { pivot_ratio });
    }
    let x = lu
        .solve(&rhs)
        .ok_or(OracleError::SingularSystem { pivot_ratio })?;

    let solution = SteadyStateSolution {
        cavity: (0..n).map(|j| x[var(j, CAVITY)]).collect(),
        dipole: (0..n).map(|j| x[var(j, DIPOLE)]).collect(),
        ports: (0..n)
            .map(|j| PortFields {
                a_in: x[var(j, A_IN)],
                a_out: x[var(j, A_OUT)],
                b_in: x[var(j, B_IN)],
                b_out: x[var(j, B_OUT)],
            })
            .collect(),
    };
    if !solution.is_finite() {
        return Err(OracleError::SingularSystem { pivot_ratio });
    }
    Ok(solution)
}

/// Open-chain `(r, t)` from a unit-amplitude steady state.
pub fn oracle_scattering(chain: &ValidatedChain, omega: f64) -> Result<ScatteringPair, OracleError> {
    let s = steady_state_solve(chain, omega, ONE, Boundary::Open)?;
    let first = s.ports[0];
    let last = s.ports[chain.len() - 1];
    Ok(ScatteringPair {
        r: first.a_out / first.a_in,
        t: last.b_out / first.a_in,
    })
}

/// Reflection of the mirror-terminated chain, `a_out⁽¹⁾/a_in⁽¹⁾`.
pub fn oracle_terminated_reflection(
    chain: &ValidatedChain,
    omega: f64,
    rho: Complex64,
) -> Result<Complex64, OracleError> {
    let s = steady_state_solve(chain, omega, ONE, Boundary::Mirror(rho))?;
    Ok(s.ports[0].a_out / s.ports[0].a_in)
}
