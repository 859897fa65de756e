//! Physical constants in SI units (CODATA 2018).

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Electron rest mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of a photon with the given energy in eV.
pub fn omega_from_ev(energy_ev: f64) -> f64 {
    energy_ev * ELEMENTARY_CHARGE / HBAR
}

/// Photon energy in eV for an angular frequency in rad/s.
pub fn ev_from_omega(omega: f64) -> f64 {
    omega * HBAR / ELEMENTARY_CHARGE
}

/// Free-space angular frequency (rad/s) for a vacuum wavelength in metres.
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn photon_energy_round_trip() {
        let w = omega_from_ev(1.55);
        assert!((ev_from_omega(w) - 1.55).abs() < 1e-14);
        // 1.55 eV is close to 800 nm light.
        let lambda = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / w;
        assert!((lambda - 800e-9).abs() < 1e-9);
    }
}
