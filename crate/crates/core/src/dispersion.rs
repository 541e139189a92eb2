//! Crystal optics for collinear, on-axis waves: refractive indices,
//! wavenumbers, group quantities by finite differences, Poynting-vector
//! walk-off, and the phase-matching cut-angle solver.

use crate::material::{Material, MaterialError};
use crate::units::{wavelength_of_omega, C};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("differentiation stencil leaves the validity range at {lambda_um} um")]
    StencilOutOfRange { lambda_um: f64 },
    #[error("no phase-matching angle in (0, 90 deg): mismatch has no sign change")]
    InfeasiblePhaseMatching,
    #[error("degenerate bracket: mismatch is ~0 over the whole scan, any angle matches")]
    DegenerateBracket,
    #[error("crystal length must be positive, got {0} m")]
    NonPositiveLength(f64),
    #[error("cut angle {0} rad outside [0, pi/2]")]
    CutAngleRange(f64),
    #[error("polarization map inconsistent with the phase-matching type")]
    PolarizationMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Ordinary,
    /// Extraordinary at the crystal cut angle.
    Extraordinary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveRole {
    Pump,
    Signal,
    Idler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmType {
    TypeI,
    TypeII,
}

/// Nonlinear crystal: material pair, cut, length, and the polarization map.
#[derive(Debug, Clone)]
pub struct CrystalSpec {
    pub material: Material,
    /// Cut angle between optic axis and propagation direction, radians.
    pub cut_angle: f64,
    /// Crystal length, metres.
    pub length: f64,
    pub pm_type: PmType,
    polarization: [Polarization; 3], // pump, signal, idler
}

impl CrystalSpec {
    /// Standard negative-uniaxial assignment: extraordinary pump;
    /// type-I gives two ordinary photons, type-II an extraordinary signal
    /// and an ordinary idler.
    pub fn new(
        material: Material,
        cut_angle: f64,
        length: f64,
        pm_type: PmType,
    ) -> Result<Self, DispersionError> {
        use Polarization::*;
        let polarization = match pm_type {
            PmType::TypeI => [Extraordinary, Ordinary, Ordinary],
            PmType::TypeII => [Extraordinary, Extraordinary, Ordinary],
        };
        Self::with_polarization(material, cut_angle, length, pm_type, polarization)
    }

    pub fn with_polarization(
        material: Material,
        cut_angle: f64,
        length: f64,
        pm_type: PmType,
        polarization: [Polarization; 3],
    ) -> Result<Self, DispersionError> {
        if !length.is_finite() || length <= 0.0 {
            return Err(DispersionError::NonPositiveLength(length));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&cut_angle) {
            return Err(DispersionError::CutAngleRange(cut_angle));
        }
        let same = polarization[1] == polarization[2];
        match pm_type {
            PmType::TypeI if !same => return Err(DispersionError::PolarizationMap),
            PmType::TypeII if same => return Err(DispersionError::PolarizationMap),
            _ => {}
        }
        Ok(CrystalSpec {
            material,
            cut_angle,
            length,
            pm_type,
            polarization,
        })
    }

    pub fn polarization(&self, role: WaveRole) -> Polarization {
        match role {
            WaveRole::Pump => self.polarization[0],
            WaveRole::Signal => self.polarization[1],
            WaveRole::Idler => self.polarization[2],
        }
    }

    /// Refractive index seen by `role` at angular frequency `omega`.
    pub fn index(&self, role: WaveRole, omega: f64) -> Result<f64, DispersionError> {
        refractive_index(
            &self.material,
            self.polarization(role),
            self.cut_angle,
            wavelength_of_omega(omega),
        )
    }

    /// k(omega) for `role`, on axis.
    pub fn wavenumber_at(&self, role: WaveRole, omega: f64) -> Result<f64, DispersionError> {
        Ok(wavenumber(self.index(role, omega)?, omega))
    }

    /// Full dispersion sample of `role` at `omega`.
    pub fn sample(&self, role: WaveRole, omega: f64) -> Result<DispersionSample, DispersionError> {
        let n = self.index(role, omega)?;
        let g = group_quantities(
            &self.material,
            self.polarization(role),
            self.cut_angle,
            omega,
        )?;
        let rho = match self.polarization(role) {
            Polarization::Ordinary => 0.0,
            Polarization::Extraordinary => {
                walkoff(&self.material, self.cut_angle, wavelength_of_omega(omega))?
            }
        };
        Ok(DispersionSample {
            omega,
            n,
            k: wavenumber(n, omega),
            inv_group_velocity: g.inv_group_velocity,
            gvd: g.gvd,
            walkoff: rho,
        })
    }

    /// Taylor data of `role` about `omega`: k and its first four
    /// frequency derivatives, plus walk-off.
    pub fn expansion(&self, role: WaveRole, omega: f64) -> Result<WaveExpansion, DispersionError> {
        self.expansion_to(role, omega, 4)
    }

    /// Taylor data truncated at derivative order `max_order` (higher slots
    /// zero). The high-order stencils reach ±12% of ω, so near the edges of
    /// the validity range only the low orders are computable.
    pub fn expansion_to(
        &self,
        role: WaveRole,
        omega: f64,
        max_order: usize,
    ) -> Result<WaveExpansion, DispersionError> {
        let pol = self.polarization(role);
        let k0 = self.wavenumber_at(role, omega)?;
        let mut d = [0.0; 4];
        for (i, slot) in d.iter_mut().enumerate().take(max_order.clamp(2, 4)) {
            *slot = k_derivative(&self.material, pol, self.cut_angle, omega, i + 1)?;
        }
        let rho = match pol {
            Polarization::Ordinary => 0.0,
            Polarization::Extraordinary => {
                walkoff(&self.material, self.cut_angle, wavelength_of_omega(omega))?
            }
        };
        Ok(WaveExpansion {
            omega,
            k0,
            k1: d[0],
            k2: d[1],
            k3: d[2],
            k4: d[3],
            walkoff: rho,
        })
    }
}

/// One wave's dispersion data at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    /// Angular frequency, rad/s.
    pub omega: f64,
    pub n: f64,
    /// Wavenumber, rad/m.
    pub k: f64,
    /// Inverse group velocity dk/dω, s/m.
    pub inv_group_velocity: f64,
    /// Group-velocity dispersion d²k/dω², s²/m.
    pub gvd: f64,
    /// Poynting-vector walk-off, radians (0 for ordinary waves).
    pub walkoff: f64,
}

/// k(ω₀) and its first four frequency derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveExpansion {
    pub omega: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub walkoff: f64,
}

impl WaveExpansion {
    pub fn sample(&self) -> DispersionSample {
        DispersionSample {
            omega: self.omega,
            n: self.k0 * C / self.omega,
            k: self.k0,
            inv_group_velocity: self.k1,
            gvd: self.k2,
            walkoff: self.walkoff,
        }
    }
}

/// Index of the wave with polarization `pol` propagating at polar angle
/// `theta` to the optic axis: n_o(λ) for ordinary, else
/// 1/n²(θ) = cos²θ/n_o² + sin²θ/n_e².
pub fn refractive_index(
    material: &Material,
    pol: Polarization,
    theta: f64,
    lambda: f64,
) -> Result<f64, DispersionError> {
    match pol {
        Polarization::Ordinary => Ok(material.ordinary.index(lambda)?),
        Polarization::Extraordinary => {
            let no = material.ordinary.index(lambda)?;
            let ne = material.extraordinary.index(lambda)?;
            let (s, c) = theta.sin_cos();
            let inv_sq = (c / no).powi(2) + (s / ne).powi(2);
            Ok(inv_sq.sqrt().recip())
        }
    }
}

/// On-axis collinear wavenumber k = ωn/c, rad/m.
#[inline]
pub fn wavenumber(n: f64, omega: f64) -> f64 {
    omega * n / C
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupQuantities {
    /// N = dk/dω, s/m.
    pub inv_group_velocity: f64,
    /// g = d²k/dω², s²/m.
    pub gvd: f64,
}

/// First and second frequency derivatives of k at `omega`.
pub fn group_quantities(
    material: &Material,
    pol: Polarization,
    theta: f64,
    omega: f64,
) -> Result<GroupQuantities, DispersionError> {
    Ok(GroupQuantities {
        inv_group_velocity: k_derivative(material, pol, theta, omega, 1)?,
        gvd: k_derivative(material, pol, theta, omega, 2)?,
    })
}

// Rounding floors force order-dependent steps: with h/ω = 1e-5 the second
// difference of k carries only ~5 good digits in f64.
const REL_STEP: [f64; 4] = [1e-5, 4e-3, 2e-2, 2e-2];

/// d^order k / dω^order by O(h⁴) central differences, Richardson-combined
/// from D(h) and D(2h) to O(h⁶).
pub fn k_derivative(
    material: &Material,
    pol: Polarization,
    theta: f64,
    omega: f64,
    order: usize,
) -> Result<f64, DispersionError> {
    assert!((1..=4).contains(&order), "derivative order 1..=4");
    let f = |w: f64| -> Result<f64, DispersionError> {
        let lam = wavelength_of_omega(w);
        let n = refractive_index(material, pol, theta, lam).map_err(|e| match e {
            DispersionError::Material(MaterialError::WavelengthOutOfRange {
                lambda_um, ..
            }) => DispersionError::StencilOutOfRange { lambda_um },
            other => other,
        })?;
        Ok(wavenumber(n, w))
    };
    let h = REL_STEP[order - 1] * omega;
    let d_h = central_stencil(&f, omega, order, h)?;
    let d_2h = central_stencil(&f, omega, order, 2.0 * h)?;
    Ok((16.0 * d_h - d_2h) / 15.0)
}

fn central_stencil(
    f: &dyn Fn(f64) -> Result<f64, DispersionError>,
    x: f64,
    order: usize,
    h: f64,
) -> Result<f64, DispersionError> {
    Ok(match order {
        1 => (f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h),
        2 => {
            (-f(x - 2.0 * h)? + 16.0 * f(x - h)? - 30.0 * f(x)? + 16.0 * f(x + h)?
                - f(x + 2.0 * h)?)
                / (12.0 * h * h)
        }
        3 => {
            (-f(x + 3.0 * h)? + 8.0 * f(x + 2.0 * h)? - 13.0 * f(x + h)? + 13.0 * f(x - h)?
                - 8.0 * f(x - 2.0 * h)?
                + f(x - 3.0 * h)?)
                / (8.0 * h.powi(3))
        }
        4 => {
            (-f(x + 3.0 * h)? + 12.0 * f(x + 2.0 * h)? - 39.0 * f(x + h)? + 56.0 * f(x)?
                - 39.0 * f(x - h)?
                + 12.0 * f(x - 2.0 * h)?
                - f(x - 3.0 * h)?)
                / (6.0 * h.powi(4))
        }
        _ => unreachable!(),
    })
}

/// Poynting-vector walk-off angle of the extraordinary wave at polar angle
/// `theta`: tan ρ = (n²(θ)/2)·sin 2θ·|1/n_e² − 1/n_o²|. Always ≥ 0.
pub fn walkoff(material: &Material, theta: f64, lambda: f64) -> Result<f64, DispersionError> {
    let no = material.ordinary.index(lambda)?;
    let ne = material.extraordinary.index(lambda)?;
    let nth = refractive_index(material, Polarization::Extraordinary, theta, lambda)?;
    let t =
        (nth * nth / 2.0) * (2.0 * theta).sin().abs() * (1.0 / (ne * ne) - 1.0 / (no * no)).abs();
    Ok(t.atan())
}

/// Walk-off of `set`-described waves: ordinary input returns exactly 0.
pub fn walkoff_for(
    material: &Material,
    pol: Polarization,
    theta: f64,
    lambda: f64,
) -> Result<f64, DispersionError> {
    match pol {
        Polarization::Ordinary => Ok(0.0),
        Polarization::Extraordinary => walkoff(material, theta, lambda),
    }
}

/// Cut angle solving k_p(θ) − k_s(θ) − k_i(θ) = 0 at the central
/// frequencies, by a 0.5° bracketing scan plus bisection.
///
/// `lambda_*` are vacuum wavelengths satisfying 1/λ_p = 1/λ_s + 1/λ_i.
pub fn phase_matching_angle(
    material: &Material,
    lambda_p: f64,
    pm_type: PmType,
    lambda_s: f64,
    lambda_i: f64,
) -> Result<f64, DispersionError> {
    let mismatch = |theta: f64| -> Result<f64, DispersionError> {
        let crystal = CrystalSpec::new(material.clone(), theta, 1e-3, pm_type)?;
        let kp =
            crystal.wavenumber_at(WaveRole::Pump, crate::units::omega_of_wavelength(lambda_p))?;
        let ks = crystal.wavenumber_at(
            WaveRole::Signal,
            crate::units::omega_of_wavelength(lambda_s),
        )?;
        let ki =
            crystal.wavenumber_at(WaveRole::Idler, crate::units::omega_of_wavelength(lambda_i))?;
        Ok(kp - ks - ki)
    };

    const SCAN_STEP_DEG: f64 = 0.5;
    const FLAT_TOL: f64 = 1e-3; // rad/m
    let mut theta = SCAN_STEP_DEG.to_radians() / 2.0;
    let mut prev = mismatch(theta)?;
    let mut all_flat = prev.abs() < FLAT_TOL;
    let mut bracket = None;
    while theta < std::f64::consts::FRAC_PI_2 - 1e-6 {
        let next_theta = (theta + SCAN_STEP_DEG.to_radians()).min(std::f64::consts::FRAC_PI_2);
        let next = mismatch(next_theta)?;
        all_flat &= next.abs() < FLAT_TOL;
        if prev.signum() != next.signum() && prev != 0.0 {
            bracket = Some((theta, next_theta, prev));
            break;
        }
        theta = next_theta;
        prev = next;
    }
    if all_flat {
        return Err(DispersionError::DegenerateBracket);
    }
    let (mut lo, mut hi, flo) = bracket.ok_or(DispersionError::InfeasiblePhaseMatching)?;
    let mut flo = flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = mismatch(mid)?;
        if fmid.abs() < 1e-9 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
