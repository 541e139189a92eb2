//! Numerical engine for collinear spontaneous parametric down-conversion
//! under pulse-front tilt.
//!
//! The crate models how angular dispersion (a pulse-front tilt ξ imposed by
//! a grating pair around the nonlinear crystal) reshapes the effective
//! group velocity and group-velocity dispersion of the interacting waves,
//! and with them the joint spectral amplitude
//! Φ(Ω_s, Ω_i) ∝ E_ω(Ω_s+Ω_i)·sinc(ΔkL/2)·exp(i s_kL/2),
//! the temporal biphoton Ψ(t₁−t₂), and the frequency entanglement of the
//! photon pair.
//!
//! Module map:
//! - [`material`] / [`dispersion`] — coefficient sets, indices, k(ω) and its
//!   derivatives, walk-off, phase-matching angle solver;
//! - [`tilt`] — gratings, tilt matching, effective N′/g′, optimal tilts;
//! - [`grid`] / [`phase_matching`] — pump envelopes, detuning grids, Δk/s_k
//!   models, joint spectra, bandwidth reports;
//! - [`biphoton`] — temporal transform and correlation metrics;
//! - [`entanglement`] — Schmidt decomposition and the double-Gaussian
//!   closed form;
//! - [`export`] — CSV and binary output formats.

pub mod biphoton;
pub mod dispersion;
pub mod entanglement;
pub mod export;
pub mod grid;
pub mod material;
pub mod numeric;
pub mod phase_matching;
pub mod tilt;
pub mod units;

pub use biphoton::{
    correlation_metrics, temporal_biphoton, transform_limit_ratio, BiphotonWaveform,
};
pub use dispersion::{
    group_quantities, phase_matching_angle, refractive_index, walkoff, wavenumber, CrystalSpec,
    DispersionSample, PmType, Polarization, WaveRole,
};
pub use entanglement::{
    bandwidth_to_model, gaussian_entropy, schmidt_decompose, DoubleGaussianModel, SchmidtSpectrum,
};
pub use grid::{FrequencyGrid, PumpEnvelope, PumpSpec};
pub use material::{Material, SellmeierSet};
pub use phase_matching::{
    auto_grid, bandwidth_report, delta_k, joint_spectrum, joint_spectrum_with_model, phase_sum,
    BandwidthReport, JointSpectrum, ModelOrder, PhaseModel,
};
pub use tilt::{
    angular_dispersion, effective_dispersion, magnification, matched_pair, optimal_tilt_type1,
    optimal_tilt_type2, tilt_from_dispersion, EffectiveDispersion, GratingSpec, TiltSetup,
};
