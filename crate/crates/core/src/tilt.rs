//! Gratings, pulse-front tilt, and the tilt-modified effective dispersion.
//!
//! A grating with angular dispersion ε tilts the intensity front of a pulse
//! by tan ξ = −λ₀ε. Inside the crystal the tilt reshuffles the first two
//! dispersion orders of every wave: N′ = N + tan ξ_p·tan ρ/c and
//! g′ = g − (tan ξ_p/c)²/k⁰. Equalizing N′ of the two downconverted waves
//! (type-II) or nulling g′ (type-I) maximizes the emission bandwidth.

use crate::dispersion::DispersionSample;
use crate::units::C;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TiltError {
    #[error("diffraction geometry invalid: cos beta = {0} must be positive")]
    GrazingDiffraction(f64),
    #[error("grating equation violated: sin(theta) + sin(beta) - m*lambda/d = {residual}")]
    GratingEquation { residual: f64 },
    #[error("|sin(theta)| = {0} exceeds 1: no incidence angle satisfies the grating equation")]
    NoIncidenceAngle(f64),
    #[error("signal and idler walk-off are equal: no tilt can equalize the group velocities")]
    DegenerateWalkoff,
    #[error("gvd must be positive to be nulled by tilt, got {0} s^2/m")]
    AnomalousDispersion(f64),
    #[error("no catalog grating satisfies both matching conditions with |beta| < 85 deg")]
    InfeasiblePair,
}

/// Diffraction grating in a fixed plane geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    /// Groove spacing, metres.
    pub groove_spacing: f64,
    /// Signed diffraction order.
    pub order: i32,
    /// Incidence angle, radians.
    pub incidence: f64,
    /// Diffraction angle, radians.
    pub diffraction: f64,
    /// Design wavelength, metres.
    pub design_wavelength: f64,
}

impl GratingSpec {
    /// Build from (d, m, β, λ₀), deriving the incidence angle from the
    /// grating equation sin θ + sin β = mλ₀/d.
    pub fn from_diffraction_angle(
        groove_spacing: f64,
        order: i32,
        diffraction: f64,
        design_wavelength: f64,
    ) -> Result<Self, TiltError> {
        let s = order as f64 * design_wavelength / groove_spacing - diffraction.sin();
        if s.abs() > 1.0 {
            return Err(TiltError::NoIncidenceAngle(s));
        }
        let g = GratingSpec {
            groove_spacing,
            order,
            incidence: s.asin(),
            diffraction,
            design_wavelength,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), TiltError> {
        if self.diffraction.cos() <= 0.0 {
            return Err(TiltError::GrazingDiffraction(self.diffraction.cos()));
        }
        let residual = self.incidence.sin() + self.diffraction.sin()
            - self.order as f64 * self.design_wavelength / self.groove_spacing;
        if residual.abs() > 1e-9 {
            return Err(TiltError::GratingEquation { residual });
        }
        Ok(())
    }
}

/// Angular dispersion ε = m/(d cos β), in 1/m.
pub fn angular_dispersion(g: &GratingSpec) -> Result<f64, TiltError> {
    let cb = g.diffraction.cos();
    if cb <= 0.0 {
        return Err(TiltError::GrazingDiffraction(cb));
    }
    Ok(g.order as f64 / (g.groove_spacing * cb))
}

/// Pulse-front tilt from angular dispersion: ξ = atan(−λ₀ε), signed.
pub fn tilt_from_dispersion(epsilon: f64, lambda0: f64) -> f64 {
    (-lambda0 * epsilon).atan()
}

/// Beam magnification α = cos θ / cos β of one grating pass.
pub fn magnification(incidence: f64, diffraction: f64) -> f64 {
    incidence.cos() / diffraction.cos()
}

/// Pump tilt plus the matched downconverted-beam tilt and magnifications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltSetup {
    /// Pump pulse-front tilt ξ_p, radians, signed (tan ξ = −λ₀ε).
    pub xi_pump: f64,
    /// Downconverted-beam tilt ξ_s, radians.
    pub xi_signal: f64,
    /// Pump-pass beam magnification α_p.
    pub mag_pump: f64,
    /// Downconverted-pass magnification α_s.
    pub mag_signal: f64,
    pub source: TiltSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiltSource {
    ExplicitTilt,
    GratingPair,
}

impl TiltSetup {
    /// Directly imposed pump tilt (no grating bookkeeping).
    pub fn explicit(xi_pump: f64) -> TiltSetup {
        TiltSetup {
            xi_pump,
            xi_signal: -xi_pump,
            mag_pump: 1.0,
            mag_signal: 1.0,
            source: TiltSource::ExplicitTilt,
        }
    }

    /// Matching-condition residuals, relative: (tan ξ_s + tan ξ_p/α_p, α_pα_s − 1).
    pub fn matching_residuals(&self) -> (f64, f64) {
        let t = self.xi_signal.tan() + self.xi_pump.tan() / self.mag_pump;
        let scale = self.xi_pump.tan().abs().max(1e-300);
        (t / scale, self.mag_pump * self.mag_signal - 1.0)
    }
}

/// Tilt-modified first and second dispersion orders of one wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDispersion {
    /// N′ = N + tan ξ_p tan ρ / c, s/m.
    pub inv_group_velocity: f64,
    /// g′ = g − (tan ξ_p/c)²/k⁰, s²/m.
    pub gvd: f64,
    pub base: DispersionSample,
    pub xi_pump: f64,
}

/// Apply pump tilt ξ_p to one wave's dispersion sample.
pub fn effective_dispersion(base: DispersionSample, xi_pump: f64) -> EffectiveDispersion {
    let t = xi_pump.tan();
    EffectiveDispersion {
        inv_group_velocity: base.inv_group_velocity + t * base.walkoff.tan() / C,
        gvd: base.gvd - (t / C).powi(2) / base.k,
        base,
        xi_pump,
    }
}

/// Tilt equalizing the effective inverse group velocities of a type-II pair:
/// ξ = atan{ c(N_i − N_s) / (tan ρ_s − tan ρ_i) }.
pub fn optimal_tilt_type2(
    signal: &DispersionSample,
    idler: &DispersionSample,
) -> Result<f64, TiltError> {
    let denom = signal.walkoff.tan() - idler.walkoff.tan();
    if denom.abs() < 1e-12 {
        return Err(TiltError::DegenerateWalkoff);
    }
    Ok((C * (idler.inv_group_velocity - signal.inv_group_velocity) / denom).atan())
}

/// Tilt nulling the effective GVD of a type-I pair: ξ = atan{(c² g k⁰)^½}.
pub fn optimal_tilt_type1(signal: &DispersionSample) -> Result<f64, TiltError> {
    if signal.gvd <= 0.0 {
        return Err(TiltError::AnomalousDispersion(signal.gvd));
    }
    Ok((C * C * signal.gvd * signal.k).sqrt().atan())
}

/// Lab-stock groove densities tried by `matched_pair`, lines per mm.
pub const GROOVE_CATALOG_PER_MM: [f64; 5] = [300.0, 600.0, 1200.0, 1800.0, 2400.0];

/// Solve for the downconverted-beam grating matching `pump_grating`:
/// tan ξ_s = −tan ξ_p/α_p and α_p·α_s = 1 at wavelength `lambda_s`.
///
/// Candidates run over the groove catalog and orders ±1, ±2; for each, β_s
/// follows from the tilt condition, θ_s from the magnification condition,
/// and the sign branches must close the grating equation to 1e-9.
pub fn matched_pair(
    pump_grating: &GratingSpec,
    lambda_s: f64,
) -> Result<(GratingSpec, TiltSetup), TiltError> {
    pump_grating.validate()?;
    let eps_p = angular_dispersion(pump_grating)?;
    let xi_p = tilt_from_dispersion(eps_p, pump_grating.design_wavelength);
    let alpha_p = magnification(pump_grating.incidence, pump_grating.diffraction);

    let tan_xi_s = -xi_p.tan() / alpha_p;

    if eps_p == 0.0 {
        // zeroth-order pump pass: mirror geometry, no dispersion to match
        let g2 = GratingSpec {
            groove_spacing: pump_grating.groove_spacing,
            order: 0,
            incidence: -pump_grating.diffraction,
            diffraction: pump_grating.diffraction,
            design_wavelength: lambda_s,
        };
        let setup = TiltSetup {
            xi_pump: 0.0,
            xi_signal: 0.0,
            mag_pump: alpha_p,
            mag_signal: 1.0 / alpha_p,
            source: TiltSource::GratingPair,
        };
        return Ok((g2, setup));
    }

    let eps_s = -tan_xi_s / lambda_s;
    // first-order solutions preferred over higher orders across the catalog
    for m in [-1i32, 1, -2, 2] {
        for per_mm in GROOVE_CATALOG_PER_MM {
            let d = 1e-3 / per_mm;
            let cos_beta = m as f64 / (d * eps_s);
            if cos_beta < 85f64.to_radians().cos() || cos_beta > 1.0 {
                continue;
            }
            let cos_theta = cos_beta / alpha_p;
            if !(0.0..=1.0).contains(&cos_theta) {
                continue;
            }
            let rhs = m as f64 * lambda_s / d;
            let sin_b = (1.0 - cos_beta * cos_beta).sqrt();
            let sin_t = (1.0 - cos_theta * cos_theta).sqrt();
            for (st, sb) in [
                (sin_t, sin_b),
                (sin_t, -sin_b),
                (-sin_t, sin_b),
                (-sin_t, -sin_b),
            ] {
                if (st + sb - rhs).abs() < 1e-9 {
                    let g2 = GratingSpec {
                        groove_spacing: d,
                        order: m,
                        incidence: st.asin(),
                        diffraction: sb.asin(),
                        design_wavelength: lambda_s,
                    };
                    let setup = TiltSetup {
                        xi_pump: xi_p,
                        xi_signal: tan_xi_s.atan(),
                        mag_pump: alpha_p,
                        mag_signal: magnification(g2.incidence, g2.diffraction),
                        source: TiltSource::GratingPair,
                    };
                    return Ok((g2, setup));
                }
            }
        }
    }
    Err(TiltError::InfeasiblePair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{CrystalSpec, PmType, WaveRole};
    use crate::material::Material;
    use crate::units::omega_of_wavelength;
    use approx::assert_relative_eq;

    fn gr1() -> GratingSpec {
        GratingSpec::from_diffraction_angle(1e-3 / 1200.0, 1, 52f64.to_radians(), 405e-9).unwrap()
    }

    #[test]
    fn angular_dispersion_reference_grating() {
        let eps = angular_dispersion(&gr1()).unwrap();
        assert_relative_eq!(eps, 1200e3 / 52f64.to_radians().cos(), max_relative = 1e-14);
        assert!((eps - 1.949e6).abs() < 1e4);
    }

    #[test]
    fn angular_dispersion_zero_order() {
        let g = GratingSpec::from_diffraction_angle(1e-3 / 1200.0, 0, 0.3, 405e-9).unwrap();
        assert_eq!(angular_dispersion(&g).unwrap(), 0.0);
    }

    #[test]
    fn angular_dispersion_600_per_mm() {
        let g = GratingSpec::from_diffraction_angle(1e-3 / 600.0, 1, 18f64.to_radians(), 810e-9)
            .unwrap();
        let eps = angular_dispersion(&g).unwrap();
        assert_relative_eq!(eps, 6.3088e5, max_relative = 1e-4);
    }

    #[test]
    fn tilt_magnitude_38_degrees() {
        let eps = angular_dispersion(&gr1()).unwrap();
        let xi = tilt_from_dispersion(eps, 405e-9);
        assert!(
            (xi.abs().to_degrees() - 38.0).abs() < 0.5,
            "{}",
            xi.to_degrees()
        );
        assert!(xi < 0.0); // sign retained: positive dispersion tilts negative
        assert_eq!(tilt_from_dispersion(0.0, 405e-9), 0.0);
        // tan xi linear in lambda
        assert_relative_eq!(
            tilt_from_dispersion(eps, 2.0 * 405e-9).tan(),
            2.0 * xi.tan(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn magnification_basics() {
        assert_relative_eq!(magnification(0.4, 0.4), 1.0);
        assert_relative_eq!(
            magnification(0.0, 60f64.to_radians()),
            2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn matched_pair_reference_geometry() {
        // pump grating 1200/mm at beta = 52 deg pairs with 600/mm near 18 deg
        let (g2, setup) = matched_pair(&gr1(), 810e-9).unwrap();
        assert_relative_eq!(g2.groove_spacing, 1e-3 / 600.0, max_relative = 1e-12);
        assert!((g2.diffraction.abs().to_degrees() - 18.0).abs() < 0.5);
        g2.validate().unwrap();
        let (r_tilt, r_mag) = setup.matching_residuals();
        assert!(r_tilt.abs() < 1e-6, "tilt residual {r_tilt}");
        assert!(r_mag.abs() < 1e-6, "mag residual {r_mag}");
        // alpha_p recorded for the pump pass
        assert_relative_eq!(setup.mag_pump, 1.5484232, max_relative = 1e-6);
    }

    #[test]
    fn matched_pair_zero_dispersion_identity() {
        let mirror = GratingSpec::from_diffraction_angle(1e-3 / 1200.0, 0, 0.25, 405e-9).unwrap();
        let (g2, setup) = matched_pair(&mirror, 810e-9).unwrap();
        assert_eq!(g2.order, 0);
        assert_eq!(setup.xi_pump, 0.0);
        assert_eq!(setup.xi_signal, 0.0);
        assert_relative_eq!(setup.mag_pump * setup.mag_signal, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn effective_dispersion_identities() {
        let base = DispersionSample {
            omega: omega_of_wavelength(810e-9),
            n: 1.66,
            k: 1.2878655143e7,
            inv_group_velocity: 5.6167140399e-9,
            gvd: 7.3320241625e-26,
            walkoff: 0.0,
        };
        let e = effective_dispersion(base, 0.0);
        assert_eq!(e.inv_group_velocity, base.inv_group_velocity);
        assert_eq!(e.gvd, base.gvd);
        // ordinary wave: only g' moves
        let e = effective_dispersion(base, 0.5);
        assert_eq!(e.inv_group_velocity, base.inv_group_velocity);
        assert!(e.gvd < base.gvd);
    }

    #[test]
    fn gvd_nearly_nulled_at_reference_tilt() {
        let crystal = bbo_type1();
        let s = crystal
            .sample(WaveRole::Signal, omega_of_wavelength(810e-9))
            .unwrap();
        let e = effective_dispersion(s, 16.2f64.to_radians());
        assert!(
            e.gvd.abs() < 0.02 * s.gvd.abs(),
            "g' = {} vs g = {}",
            e.gvd,
            s.gvd
        );
    }

    fn bbo_type1() -> CrystalSpec {
        let m = Material::resolve("BBO").unwrap();
        let theta =
            crate::dispersion::phase_matching_angle(&m, 405e-9, PmType::TypeI, 810e-9, 810e-9)
                .unwrap();
        CrystalSpec::new(m, theta, 2e-3, PmType::TypeI).unwrap()
    }

    fn bbo_type2() -> CrystalSpec {
        let m = Material::resolve("BBO").unwrap();
        let theta =
            crate::dispersion::phase_matching_angle(&m, 405e-9, PmType::TypeII, 810e-9, 810e-9)
                .unwrap();
        CrystalSpec::new(m, theta, 2e-3, PmType::TypeII).unwrap()
    }

    #[test]
    fn optimal_type2_tilt_reference_value() {
        let crystal = bbo_type2();
        let omega = omega_of_wavelength(810e-9);
        let s = crystal.sample(WaveRole::Signal, omega).unwrap();
        let i = crystal.sample(WaveRole::Idler, omega).unwrap();
        let xi = optimal_tilt_type2(&s, &i).unwrap();
        assert!((xi.to_degrees() - 38.0).abs() < 2.0, "{}", xi.to_degrees());
        assert_relative_eq!(xi.to_degrees(), 38.108357, max_relative = 1e-5);
        // feeding back equalizes the effective inverse group velocities
        let es = effective_dispersion(s, xi);
        let ei = effective_dispersion(i, xi);
        assert!(
            (es.inv_group_velocity - ei.inv_group_velocity).abs()
                < 1e-6 * s.inv_group_velocity.abs()
        );
        // label swap leaves the optimum invariant (both signs flip)
        let xi_swapped = optimal_tilt_type2(&i, &s).unwrap();
        assert_relative_eq!(xi_swapped, xi, max_relative = 1e-12);
    }

    #[test]
    fn optimal_type2_requires_walkoff_contrast() {
        let omega = omega_of_wavelength(810e-9);
        let mk = |n_grp: f64, rho: f64| DispersionSample {
            omega,
            n: 1.6,
            k: 1.24e7,
            inv_group_velocity: n_grp / C,
            gvd: 6e-26,
            walkoff: rho,
        };
        assert_relative_eq!(
            optimal_tilt_type2(&mk(1.685, 0.07), &mk(1.685, 0.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            optimal_tilt_type2(&mk(1.685, 0.05), &mk(1.627, 0.05)),
            Err(TiltError::DegenerateWalkoff)
        ));
    }

    #[test]
    fn optimal_type1_tilt_reference_value() {
        let crystal = bbo_type1();
        let s = crystal
            .sample(WaveRole::Signal, omega_of_wavelength(810e-9))
            .unwrap();
        let xi = optimal_tilt_type1(&s).unwrap();
        assert!((xi.to_degrees() - 16.2).abs() < 1.0, "{}", xi.to_degrees());
        assert_relative_eq!(xi.to_degrees(), 16.241813, max_relative = 1e-6);
        let e = effective_dispersion(s, xi);
        assert!(e.gvd.abs() < 1e-6 * s.gvd.abs(), "g' = {}", e.gvd);
    }

    #[test]
    fn optimal_type1_scalings_and_errors() {
        let omega = omega_of_wavelength(810e-9);
        let mk = |gvd: f64| DispersionSample {
            omega,
            n: 1.66,
            k: 1.2878655143e7,
            inv_group_velocity: 5.6e-9,
            gvd,
            walkoff: 0.0,
        };
        let xi1 = optimal_tilt_type1(&mk(1e-31)).unwrap();
        assert!(xi1 < 1e-3); // g -> 0+ gives xi -> 0
        let xi_g = optimal_tilt_type1(&mk(4e-26)).unwrap();
        let xi_4g = optimal_tilt_type1(&mk(16e-26)).unwrap();
        assert_relative_eq!(xi_4g.tan(), 2.0 * xi_g.tan(), max_relative = 1e-12);
        assert!(matches!(
            optimal_tilt_type1(&mk(-1e-26)),
            Err(TiltError::AnomalousDispersion(_))
        ));
    }

    #[test]
    fn grating_route_consistent_with_group_velocity_matching() {
        // |xi| from the 1200/mm, 52 deg grating at 405 nm agrees with the
        // type-II group-velocity-matching optimum to better than a degree
        let eps = angular_dispersion(&gr1()).unwrap();
        let xi_grating = tilt_from_dispersion(eps, 405e-9).abs();
        let crystal = bbo_type2();
        let omega = omega_of_wavelength(810e-9);
        let s = crystal.sample(WaveRole::Signal, omega).unwrap();
        let i = crystal.sample(WaveRole::Idler, omega).unwrap();
        let xi_match = optimal_tilt_type2(&s, &i).unwrap().abs();
        assert!(
            (xi_grating - xi_match).abs() < 1f64.to_radians(),
            "grating {} deg vs matching {} deg",
            xi_grating.to_degrees(),
            xi_match.to_degrees()
        );
    }

    proptest::proptest! {
        #[test]
        fn matched_pair_invariants_hold(beta_deg in 35.0f64..70.0) {
            // any feasible pump geometry that yields a catalog solution
            // satisfies both matching conditions and the grating equation
            if let Ok(g1) = GratingSpec::from_diffraction_angle(
                1e-3 / 1200.0, 1, beta_deg.to_radians(), 405e-9,
            ) {
                if let Ok((g2, setup)) = matched_pair(&g1, 810e-9) {
                    let (rt, rm) = setup.matching_residuals();
                    proptest::prop_assert!(rt.abs() < 1e-6);
                    proptest::prop_assert!(rm.abs() < 1e-6);
                    proptest::prop_assert!(g2.validate().is_ok());
                }
            }
        }
    }
}
