//! Frequency-entanglement measures: Schmidt decomposition of discretized
//! joint spectra and the closed-form spectrum of the double-Gaussian model
//! Φ ∝ exp{−(Ω_s+Ω_i)²/B_p²}·exp{−(Ω_s−Ω_i)²/B_c²}.
//!
//! The double Gaussian has a geometric Schmidt spectrum λ_n = (1−μ)μⁿ with
//! μ = ((r−1)/(r+1))² and r = B_c/B_p, hence K = (r + 1/r)/2. The closed
//! form is validated against the numerical SVD route in the tests.

use crate::grid::{PumpEnvelope, PumpSpec};
use crate::phase_matching::{Amplitude, BandwidthReport, JointSpectrum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EntanglementError {
    #[error("Schmidt decomposition needs a 2D (pulsed-pump) joint spectrum")]
    NotTwoDimensional,
    #[error("bandwidths must be positive, got B_p = {bp}, B_c = {bc}")]
    NonPositiveBandwidth { bp: f64, bc: f64 },
    #[error("degenerate zero-width bandwidth report")]
    DegenerateWidth,
}

/// Schmidt coefficients below this weight are discarded.
pub const COEFFICIENT_FLOOR: f64 = 1e-12;

/// Default pump bandwidth when the pump is treated as monochromatic:
/// 2π·5 MHz.
pub const DEFAULT_CW_PUMP_BANDWIDTH: f64 = 2.0 * std::f64::consts::PI * 5e6;

/// Double-Gaussian joint-spectrum model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleGaussianModel {
    /// Pump bandwidth B_p, rad/s.
    pub pump_bandwidth: f64,
    /// Biphoton bandwidth B_c, rad/s.
    pub biphoton_bandwidth: f64,
}

impl DoubleGaussianModel {
    pub fn new(pump_bandwidth: f64, biphoton_bandwidth: f64) -> Result<Self, EntanglementError> {
        let ok = |b: f64| b.is_finite() && b > 0.0;
        if !ok(pump_bandwidth) || !ok(biphoton_bandwidth) {
            return Err(EntanglementError::NonPositiveBandwidth {
                bp: pump_bandwidth,
                bc: biphoton_bandwidth,
            });
        }
        Ok(DoubleGaussianModel {
            pump_bandwidth,
            biphoton_bandwidth,
        })
    }

    /// B_c/B_p.
    pub fn ratio(&self) -> f64 {
        self.biphoton_bandwidth / self.pump_bandwidth
    }

    /// Amplitude at (Ω_s, Ω_i), unnormalized.
    pub fn amplitude(&self, om_s: f64, om_i: f64) -> f64 {
        let p = (om_s + om_i) / self.pump_bandwidth;
        let c = (om_s - om_i) / self.biphoton_bandwidth;
        (-p * p - c * c).exp()
    }
}

/// Schmidt coefficients with the derived mode count and entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// Descending λ_n, truncated at [`COEFFICIENT_FLOOR`]. May be empty when
    /// `coefficients_elided` is set (huge mode counts).
    pub coefficients: Vec<f64>,
    /// K = 1/Σλ_n².
    pub schmidt_number: f64,
    /// E = −Σ λ_n log₂ λ_n, ebits.
    pub entropy: f64,
    /// Spectrum looked truncated by the grid (boundary mass not negligible).
    pub truncated: bool,
    /// λ_n were not materialized (analytic path with ≫10⁵ modes).
    pub coefficients_elided: bool,
}

/// Schmidt decomposition of a discretized 2D joint spectrum: SVD of the
/// cell-area-weighted amplitude matrix, λ_n = normalized squared singular
/// values.
pub fn schmidt_decompose(js: &JointSpectrum) -> Result<SchmidtSpectrum, EntanglementError> {
    let a = match &js.amplitude {
        Amplitude::Grid(a) => a,
        Amplitude::Line(_) => return Err(EntanglementError::NotTwoDimensional),
    };
    let n = js.grid.points;
    let cell = js.grid.step(); // sqrt(dΩ_s · dΩ_i)
    let m = DMatrix::from_fn(n, n, |r, c| a[(r, c)] * Complex64::new(cell, 0.0));

    // boundary mass flags spectra clipped by the grid
    let total: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    let mut edge = 0.0;
    for k in 0..n {
        edge += a[(0, k)].norm_sqr()
            + a[(n - 1, k)].norm_sqr()
            + a[(k, 0)].norm_sqr()
            + a[(k, n - 1)].norm_sqr();
    }
    let truncated = total > 0.0 && edge / total > 1e-6;

    let sv = m.singular_values();
    let total_sq: f64 = sv.iter().map(|s| s * s).sum();
    let mut coefficients: Vec<f64> = sv
        .iter()
        .map(|s| s * s / total_sq)
        .filter(|&l| l >= COEFFICIENT_FLOOR)
        .collect();
    coefficients.sort_by(|x, y| y.total_cmp(x));

    let (k, e) = number_and_entropy(&coefficients);
    Ok(SchmidtSpectrum {
        coefficients,
        schmidt_number: k,
        entropy: e,
        truncated,
        coefficients_elided: false,
    })
}

fn number_and_entropy(lam: &[f64]) -> (f64, f64) {
    let sum_sq: f64 = lam.iter().map(|l| l * l).sum();
    let e: f64 = -lam
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.log2())
        .sum::<f64>();
    (1.0 / sum_sq, e)
}

/// Closed-form geometric Schmidt spectrum of the double Gaussian, stable up
/// to ratios of 10⁹. K and E come from the closed form; λ_n are materialized
/// only while they stay above [`COEFFICIENT_FLOOR`] and the head is short
/// enough to be useful.
pub fn gaussian_entropy(model: &DoubleGaussianModel) -> SchmidtSpectrum {
    let r = model.ratio();
    let r = if r >= 1.0 { r } else { 1.0 / r };
    // 1 − μ = 4r/(r+1)², exact and stable for large r
    let one_minus_mu = 4.0 * r / ((r + 1.0) * (r + 1.0));
    let mu = 1.0 - one_minus_mu;
    let schmidt_number = 0.5 * (r + 1.0 / r);
    let entropy = if mu <= 0.0 {
        0.0
    } else {
        // E·ln2 = −ln(1−μ) − μ·ln μ/(1−μ), with ln μ = ln(1−(1−μ))
        let ln_mu = (-one_minus_mu).ln_1p();
        (-(one_minus_mu.ln()) - mu * ln_mu / one_minus_mu) / std::f64::consts::LN_2
    };

    const MAX_MODES: usize = 65_536;
    let mut coefficients = Vec::new();
    let mut coefficients_elided = false;
    if mu <= 0.0 {
        coefficients.push(1.0);
    } else {
        // head fits iff μ^MAX_MODES < floor
        let needed = (COEFFICIENT_FLOOR / one_minus_mu).ln() / mu.ln();
        if needed.is_finite() && needed < MAX_MODES as f64 {
            let mut lam = one_minus_mu;
            while lam >= COEFFICIENT_FLOOR {
                coefficients.push(lam);
                lam *= mu;
            }
        } else {
            coefficients_elided = true;
        }
    }

    SchmidtSpectrum {
        coefficients,
        schmidt_number,
        entropy,
        truncated: false,
        coefficients_elided,
    }
}

/// Fit a double-Gaussian model to a measured bandwidth report:
/// B_c = 2 × (singles FWHM in rad/s), the conversion convention fixed by the
/// reference pair 31 nm @ 1064 nm ↔ 2π·16.4 THz; B_p from the pump spec
/// (2π·5 MHz for cw).
pub fn bandwidth_to_model(
    report: &BandwidthReport,
    pump: &PumpSpec,
) -> Result<DoubleGaussianModel, EntanglementError> {
    let domega = report.singles.omega_fwhm;
    if !domega.is_finite() || domega <= 0.0 {
        return Err(EntanglementError::DegenerateWidth);
    }
    let bc = 2.0 * domega;
    let bp = match pump.envelope {
        PumpEnvelope::Cw => DEFAULT_CW_PUMP_BANDWIDTH,
        PumpEnvelope::Gaussian { bandwidth } => bandwidth,
    };
    DoubleGaussianModel::new(bp, bc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use crate::phase_matching::{ModelTag, WidthTriple};
    use crate::units::{linearized_wavelength_fwhm, omega_of_wavelength};
    use approx::assert_relative_eq;
    use ndarray::Array2;

    fn grid_spectrum<F: Fn(f64, f64) -> f64>(half: f64, n: usize, f: F) -> JointSpectrum {
        let ws0 = omega_of_wavelength(810e-9);
        let grid = FrequencyGrid::new(ws0, ws0, half, n).unwrap();
        let om = grid.detunings();
        let mut a = Array2::<Complex64>::zeros((n, n));
        for (j, &os) in om.iter().enumerate() {
            for (k, &oi) in om.iter().enumerate() {
                a[(j, k)] = Complex64::new(f(os, oi), 0.0);
            }
        }
        JointSpectrum {
            grid,
            amplitude: Amplitude::Grid(a),
            model: ModelTag::TaylorOrder(4),
            phase_offset: 0.0,
            warnings: vec![],
        }
    }

    fn double_gaussian_spectrum(r: f64, n: usize) -> JointSpectrum {
        let bc = 2e13;
        let model = DoubleGaussianModel::new(bc / r, bc).unwrap();
        let half = 2.8 * bc;
        grid_spectrum(half, n, move |os, oi| model.amplitude(os, oi))
    }

    #[test]
    fn separable_product_state() {
        let js = grid_spectrum(5e13, 128, |os, oi| {
            ((-(os / 1.3e13).powi(2)).exp()) * ((-(oi / 0.8e13).powi(2)).exp())
        });
        let s = schmidt_decompose(&js).unwrap();
        assert!(
            (s.schmidt_number - 1.0).abs() < 1e-6,
            "K = {}",
            s.schmidt_number
        );
        assert!(s.entropy.abs() < 1e-6, "E = {}", s.entropy);
    }

    #[test]
    fn equal_bandwidths_are_separable() {
        let js = double_gaussian_spectrum(1.0, 128);
        let s = schmidt_decompose(&js).unwrap();
        assert!((s.schmidt_number - 1.0).abs() < 1e-9);
    }

    #[test]
    fn svd_matches_closed_form_at_ratio_10() {
        let js = double_gaussian_spectrum(10.0, 512);
        let svd = schmidt_decompose(&js).unwrap();
        let closed = gaussian_entropy(&DoubleGaussianModel::new(1.0, 10.0).unwrap());
        assert!(
            ((svd.entropy - closed.entropy) / closed.entropy).abs() < 0.01,
            "svd {} closed {}",
            svd.entropy,
            closed.entropy
        );
        assert_relative_eq!(
            svd.schmidt_number,
            closed.schmidt_number,
            max_relative = 1e-4
        );
        assert_relative_eq!(closed.schmidt_number, 5.05, max_relative = 1e-12);
        assert_relative_eq!(closed.entropy, 2.76944, max_relative = 1e-5);
    }

    #[test]
    fn svd_grid_refinement_stability() {
        for r in [5.0, 20.0] {
            let a = schmidt_decompose(&double_gaussian_spectrum(r, 512)).unwrap();
            let b = schmidt_decompose(&double_gaussian_spectrum(r, 1024)).unwrap();
            assert!(
                ((a.entropy - b.entropy) / b.entropy).abs() < 1e-4,
                "r={r}: E {} vs {}",
                a.entropy,
                b.entropy
            );
            assert!(((a.schmidt_number - b.schmidt_number) / b.schmidt_number).abs() < 1e-4);
        }
    }

    #[test]
    fn schmidt_coefficients_normalized() {
        let s = schmidt_decompose(&double_gaussian_spectrum(10.0, 512)).unwrap();
        let sum: f64 = s.coefficients.iter().sum();
        assert!((sum - 1.0).abs() < 1e-6);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.entropy <= (s.coefficients.len() as f64).log2() + 1e-12);
        assert!(s.schmidt_number <= 2f64.powf(s.entropy) * (1.0 + 1e-3));
    }

    #[test]
    fn closed_form_reference_anchors() {
        let e1 = gaussian_entropy(&DoubleGaussianModel::new(1.0, 3.3e6).unwrap());
        assert_relative_eq!(e1.entropy, 21.0976, max_relative = 1e-4);
        assert!(e1.coefficients_elided);
        let e2 = gaussian_entropy(&DoubleGaussianModel::new(1.0, 8.4e7).unwrap());
        assert_relative_eq!(e2.entropy, 25.7666, max_relative = 1e-4);
        // stability to extreme ratios
        let e3 = gaussian_entropy(&DoubleGaussianModel::new(1.0, 1e9).unwrap());
        assert!(e3.entropy.is_finite() && e3.entropy > e2.entropy);
    }

    #[test]
    fn entropy_zero_iff_unit_ratio() {
        let s = gaussian_entropy(&DoubleGaussianModel::new(2e12, 2e12).unwrap());
        assert_eq!(s.entropy, 0.0);
        assert_eq!(s.schmidt_number, 1.0);
        assert_eq!(s.coefficients, vec![1.0]);
    }

    #[test]
    fn entropy_monotonic_in_ratio() {
        let mut prev = -1.0;
        for i in 0..40 {
            let r = 10f64.powf(i as f64 / 5.0);
            let e = gaussian_entropy(&DoubleGaussianModel::new(1.0, r).unwrap()).entropy;
            assert!(e >= prev, "not monotonic at r = {r}");
            prev = e;
        }
    }

    #[test]
    fn ratio_inversion_symmetric() {
        let a = gaussian_entropy(&DoubleGaussianModel::new(1.0, 50.0).unwrap());
        let b = gaussian_entropy(&DoubleGaussianModel::new(50.0, 1.0).unwrap());
        assert_relative_eq!(a.entropy, b.entropy, max_relative = 1e-12);
    }

    fn report_with_singles(domega: f64, lambda0: f64) -> BandwidthReport {
        let t = WidthTriple {
            omega_fwhm: domega,
            lambda_fwhm: linearized_wavelength_fwhm(domega, lambda0),
            lambda_fwhm_linear: linearized_wavelength_fwhm(domega, lambda0),
        };
        BandwidthReport {
            signal_wavelength: lambda0,
            singles: t,
            antidiagonal: t,
            multi_lobed: false,
        }
    }

    #[test]
    fn bandwidth_conversion_anchor() {
        // 31 nm at 1064 nm maps to B_c = 2π·16.4 THz within 2%
        let lam = 1064e-9;
        let domega = 2.0 * std::f64::consts::PI * crate::units::C * 31e-9 / (lam * lam);
        let report = report_with_singles(domega, lam);
        let model = bandwidth_to_model(&report, &PumpSpec::cw(532e-9)).unwrap();
        let thz = model.biphoton_bandwidth / (2.0 * std::f64::consts::PI * 1e12);
        assert!((thz - 16.4).abs() < 0.02 * 16.4, "B_c = 2pi {thz} THz");
        assert_relative_eq!(model.pump_bandwidth, DEFAULT_CW_PUMP_BANDWIDTH);
    }

    #[test]
    fn bandwidth_conversion_wide() {
        let lam = 810e-9;
        let domega = 2.0 * std::f64::consts::PI * crate::units::C * 500e-9 / (lam * lam);
        let report = report_with_singles(domega, lam);
        let model = bandwidth_to_model(&report, &PumpSpec::cw(405e-9)).unwrap();
        assert!(model.biphoton_bandwidth > 2.0 * std::f64::consts::PI * 420e12);
    }

    #[test]
    fn zero_width_rejected() {
        let report = report_with_singles(0.0, 810e-9);
        assert!(matches!(
            bandwidth_to_model(&report, &PumpSpec::cw(405e-9)),
            Err(EntanglementError::DegenerateWidth)
        ));
    }

    #[test]
    fn cw_line_rejected() {
        let ws0 = omega_of_wavelength(810e-9);
        let grid = FrequencyGrid::new(ws0, ws0, 1e13, 64).unwrap();
        let js = JointSpectrum {
            grid,
            amplitude: Amplitude::Line(vec![Complex64::new(1.0, 0.0); 64]),
            model: ModelTag::ExactUntilted,
            phase_offset: 0.0,
            warnings: vec![],
        };
        assert!(matches!(
            schmidt_decompose(&js),
            Err(EntanglementError::NotTwoDimensional)
        ));
    }

    #[test]
    fn clipped_spectrum_flagged() {
        // wide flat-ish gaussian clipped by a narrow grid
        let js = grid_spectrum(1e12, 64, |os, oi| {
            (-((os + oi) / 5e13).powi(2) - ((os - oi) / 5e13).powi(2)).exp()
        });
        let s = schmidt_decompose(&js).unwrap();
        assert!(s.truncated);
    }
}
