//! Scattering, slow-light and phase-gate analysis for chains of side-coupled
//! nanocavities, each optionally hosting a two-level quantum dot.
//!
//! The chain is described in the weak-excitation limit, where every
//! cavity-QD subsystem is a linear two-port. Two independent routes compute
//! the scattering amplitudes:
//!
//! * [`transfer`]: 2x2 transfer matrices cascaded along the waveguide.
//! * [`oracle`]: the full steady-state linear system assembled from the
//!   equations of motion and input-output relations.
//!
//! On top of these, [`spectra`] produces sweeps, lineshape features and
//! group delay, and [`gate`] evaluates the mirror-terminated chain as an
//! N-qubit conditional phase gate.

pub mod gate;
pub mod model;
pub mod oracle;
pub mod presets;
pub mod random;
pub mod spectra;
pub mod transfer;

pub use num_complex::Complex64;

pub use gate::{
    calibrate_mirror_phase, configured_chain, fidelity_and_loss, gate_amplitudes, gate_sweep,
    evaluate_gate, DetuningScenario, GateError, GateResult, GateSweepRow, QubitConfiguration,
    QubitState,
};
pub use model::{
    normalize_units, validate_config, ChainConfig, FrequencyGrid, FrequencyUnit, MirrorTermination,
    ModelError, ResolvedLink, Subsystem, SubsystemParams, ValidatedChain, WaveguideLink,
};
pub use oracle::{oracle_scattering, oracle_terminated_reflection, steady_state_solve, Boundary, OracleError, SteadyStateSolution};
pub use spectra::{
    dressed_mode_positions, find_features, group_delay, sweep, Channel, DressedModes, FeatureKind,
    GroupDelay, SpectralFeature, Spectrum, SpectrumError, SpectrumPoint,
};
pub use transfer::{
    cascade, scattering, subsystem_alpha, subsystem_matrix, terminated_reflection,
    waveguide_matrix, ScatteringPair, TransferError, TransferMatrix,
};
