//! Frequency grids and pump spectral envelopes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("points-per-axis must be a power of two >= 16, got {0}")]
    BadPointCount(usize),
    #[error("half-span must be positive and below the signal/idler centre frequency")]
    BadSpan,
    #[error("gaussian pump bandwidth must be positive, got {0}")]
    BadPumpBandwidth(f64),
}

/// Pump spectral envelope at the crystal input face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpEnvelope {
    /// Monochromatic limit: detunings anticorrelated, Ω_s = −Ω_i.
    Cw,
    /// Gaussian with the given intensity-FWHM bandwidth (rad/s).
    Gaussian { bandwidth: f64 },
}

/// Pump description: central wavelength plus spectral envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSpec {
    /// Central vacuum wavelength, metres.
    pub wavelength: f64,
    pub envelope: PumpEnvelope,
}

impl PumpSpec {
    pub fn cw(wavelength: f64) -> Self {
        PumpSpec {
            wavelength,
            envelope: PumpEnvelope::Cw,
        }
    }

    pub fn gaussian(wavelength: f64, bandwidth: f64) -> Result<Self, GridError> {
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(GridError::BadPumpBandwidth(bandwidth));
        }
        Ok(PumpSpec {
            wavelength,
            envelope: PumpEnvelope::Gaussian { bandwidth },
        })
    }

    /// Spectral amplitude at pump detuning `nu = Ω_s + Ω_i`.
    /// Gaussian case: exp(−ν²/w²) with the intensity FWHM equal to the
    /// stated bandwidth, i.e. w = B/√(2 ln 2). Cw pumps have no amplitude
    /// profile (the grid collapses to the antidiagonal instead).
    pub fn amplitude(&self, nu: f64) -> f64 {
        match self.envelope {
            PumpEnvelope::Cw => {
                if nu == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            PumpEnvelope::Gaussian { bandwidth } => {
                let w = bandwidth / (2.0 * std::f64::consts::LN_2).sqrt();
                (-(nu / w) * (nu / w)).exp()
            }
        }
    }
}

/// Uniform detuning grid, symmetric about the signal/idler centres.
///
/// Samples sit at Ω_k = (k + 1/2 − N/2)·δ so the set {Ω_k} is symmetric
/// under Ω → −Ω and the antidiagonal Ω_i = −Ω_s maps node (j, k) to
/// k = N−1−j exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    /// Signal central angular frequency, rad/s.
    pub signal_center: f64,
    /// Idler central angular frequency, rad/s.
    pub idler_center: f64,
    /// Half-span of the detuning axis, rad/s.
    pub half_span: f64,
    /// Samples per axis (power of two).
    pub points: usize,
}

impl FrequencyGrid {
    pub fn new(
        signal_center: f64,
        idler_center: f64,
        half_span: f64,
        points: usize,
    ) -> Result<Self, GridError> {
        if points < 16 || !points.is_power_of_two() {
            return Err(GridError::BadPointCount(points));
        }
        if !half_span.is_finite()
            || half_span <= 0.0
            || half_span >= signal_center
            || half_span >= idler_center
        {
            return Err(GridError::BadSpan);
        }
        Ok(FrequencyGrid {
            signal_center,
            idler_center,
            half_span,
            points,
        })
    }

    /// Grid spacing, rad/s.
    pub fn step(&self) -> f64 {
        2.0 * self.half_span / self.points as f64
    }

    /// Detuning of sample `k`.
    pub fn detuning(&self, k: usize) -> f64 {
        (k as f64 + 0.5 - self.points as f64 / 2.0) * self.step()
    }

    /// All detunings in index order.
    pub fn detunings(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.detuning(k)).collect()
    }

    /// Index of the node with detuning −Ω_k (exact by construction).
    pub fn mirror_index(&self, k: usize) -> usize {
        self.points - 1 - k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = FrequencyGrid::new(2.3e15, 2.3e15, 1e14, 64).unwrap();
        let om = g.detunings();
        for k in 0..64 {
            assert_eq!(om[k], -om[g.mirror_index(k)]);
        }
        assert!((om[1] - om[0] - g.step()).abs() < 1e-3);
    }

    #[test]
    fn point_count_validated() {
        assert!(FrequencyGrid::new(2.3e15, 2.3e15, 1e14, 100).is_err());
        assert!(FrequencyGrid::new(2.3e15, 2.3e15, 1e14, 8).is_err());
        assert!(FrequencyGrid::new(2.3e15, 2.3e15, 3e15, 64).is_err());
    }

    #[test]
    fn gaussian_pump_intensity_fwhm() {
        let b = 2e12;
        let p = PumpSpec::gaussian(405e-9, b).unwrap();
        let half = p.amplitude(b / 2.0).powi(2);
        assert!((half - 0.5).abs() < 1e-12);
    }
}
