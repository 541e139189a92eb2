//! Physical constants and unit conversions. Internal representation is
//! strict SI (metres, seconds, radians, rad/s); everything else is a view.

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda` (m).
#[inline]
pub fn omega_of_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / lambda
}

/// Vacuum wavelength (m) at angular frequency `omega` (rad/s).
#[inline]
pub fn wavelength_of_omega(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / omega
}

/// FWHM in wavelength (m) equivalent, to first order, to an angular-frequency
/// FWHM `domega` at centre wavelength `lambda0`.
#[inline]
pub fn linearized_wavelength_fwhm(domega: f64, lambda0: f64) -> f64 {
    lambda0 * lambda0 * domega / (2.0 * std::f64::consts::PI * C)
}

#[inline]
pub fn deg_to_rad(d: f64) -> f64 {
    d.to_radians()
}

#[inline]
pub fn rad_to_deg(r: f64) -> f64 {
    r.to_degrees()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_omega_round_trip() {
        let lam = 810e-9;
        assert!((wavelength_of_omega(omega_of_wavelength(lam)) - lam).abs() < 1e-21);
    }
}
