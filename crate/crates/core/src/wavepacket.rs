//! Free-electron Gaussian wavepackets with quadratic (longitudinal-mass) dispersion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{ELECTRON_MASS, HBAR, SPEED_OF_LIGHT};
use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Kinematics of the reference electron with velocity `beta0 * c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativisticElectron {
    pub beta0: f64,
    pub gamma0: f64,
    /// Velocity, m/s.
    pub v0: f64,
    /// Central momentum, kg m/s.
    pub p0: f64,
    /// Total energy gamma m c^2, J.
    pub energy0: f64,
    /// Longitudinal mass gamma^3 m, kg.
    pub m_star: f64,
}

impl RelativisticElectron {
    pub fn from_beta(beta0: f64) -> Result<Self> {
        if !(beta0 > 0.0 && beta0 < 1.0) {
            return Err(Error::OutOfRange {
                name: "beta0",
                value: beta0,
                bound: "0 < beta0 < 1".into(),
            });
        }
        let gamma0 = 1.0 / (1.0 - beta0 * beta0).sqrt();
        let v0 = beta0 * SPEED_OF_LIGHT;
        Ok(Self {
            beta0,
            gamma0,
            v0,
            p0: gamma0 * ELECTRON_MASS * v0,
            energy0: gamma0 * ELECTRON_MASS * SPEED_OF_LIGHT * SPEED_OF_LIGHT,
            m_star: gamma0.powi(3) * ELECTRON_MASS,
        })
    }

    /// Electron with the given kinetic energy in eV.
    pub fn from_kinetic_energy_ev(kinetic_ev: f64) -> Result<Self> {
        ensure_positive("kinetic_energy", kinetic_ev)?;
        let rest_ev = ELECTRON_MASS * SPEED_OF_LIGHT * SPEED_OF_LIGHT / crate::constants::ELEMENTARY_CHARGE;
        let gamma = 1.0 + kinetic_ev / rest_ev;
        Self::from_beta((1.0 - 1.0 / (gamma * gamma)).sqrt())
    }

    /// Exact energy c sqrt(m^2 c^2 + p^2) and its second-order expansion about p0.
    pub fn dispersion_energy(&self, p: f64) -> DispersionEnergy {
        let mc = ELECTRON_MASS * SPEED_OF_LIGHT;
        let exact = SPEED_OF_LIGHT * (mc * mc + p * p).sqrt();
        let dp = p - self.p0;
        let quadratic = self.energy0 + self.v0 * dp + dp * dp / (2.0 * self.m_star);
        DispersionEnergy { exact, quadratic }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEnergy {
    pub exact: f64,
    pub quadratic: f64,
}

impl DispersionEnergy {
    pub fn relative_error(&self) -> f64 {
        ((self.exact - self.quadratic) / self.exact).abs()
    }
}

/// Gaussian wavepacket of RMS length `sigma_z0` at the reference time t = 0.
///
/// `chirp` is the quadratic spectral phase coefficient C in
/// `exp(i C (p - p0)^2)` (units (kg m/s)^-2). Positive C compresses the packet,
/// which reaches its minimum length `sigma_z0` at `t = 2 m* hbar C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWavepacket {
    pub electron: RelativisticElectron,
    pub sigma_z0: f64,
    pub chirp: f64,
    /// Arrival time of the packet centre at z = 0, s.
    pub t_emit: f64,
}

impl GaussianWavepacket {
    pub fn new(electron: RelativisticElectron, sigma_z0: f64) -> Result<Self> {
        ensure_positive("sigma_z0", sigma_z0)?;
        Ok(Self {
            electron,
            sigma_z0,
            chirp: 0.0,
            t_emit: 0.0,
        })
    }

    pub fn with_chirp(mut self, chirp: f64) -> Result<Self> {
        self.chirp = ensure_finite("chirp", chirp)?;
        Ok(self)
    }

    /// Momentum spread hbar / (2 sigma_z0).
    pub fn sigma_p0(&self) -> f64 {
        HBAR / (2.0 * self.sigma_z0)
    }

    /// Dispersive spreading rate hbar / (2 m* sigma_z0^2), 1/s.
    pub fn xi(&self) -> f64 {
        HBAR / (2.0 * self.electron.m_star * self.sigma_z0 * self.sigma_z0)
    }

    /// Time shift -2 m* hbar C produced by the chirp.
    pub fn chirp_time_offset(&self) -> f64 {
        -2.0 * self.electron.m_star * HBAR * self.chirp
    }

    /// Complex squared width sigma_z0^2 + i (hbar t / 2m* - hbar^2 C).
    pub fn complex_width_sq(&self, t: f64) -> Complex64 {
        Complex64::new(
            self.sigma_z0 * self.sigma_z0,
            HBAR * t / (2.0 * self.electron.m_star) - HBAR * HBAR * self.chirp,
        )
    }

    /// RMS length of the probability density at drift time `t`.
    pub fn sigma_z_at(&self, t: f64) -> f64 {
        let s = self.complex_width_sq(t);
        (s.norm_sqr() / s.re).sqrt()
    }

    /// RMS duration of the density at a fixed plane after drift time `t`.
    pub fn sigma_t_at(&self, t: f64) -> f64 {
        self.sigma_z_at(t) / self.electron.v0
    }

    /// Drift time at which the packet has spread to RMS length `target`.
    ///
    /// Only the branch after the waist is considered.
    pub fn drift_time_for_width(&self, target: f64) -> Result<f64> {
        ensure_positive("target_sigma_z", target)?;
        let waist = (-self.chirp_time_offset()).max(0.0);
        let s_min = self.sigma_z_at(waist);
        if target < s_min {
            return Err(Error::Precondition(format!(
                "requested width {target:e} m is below the minimum {s_min:e} m"
            )));
        }
        // sigma_z^2 = sigma_z0^2 (1 + ((t - t_w) xi)^2) after the waist.
        let ratio = target / self.sigma_z0;
        Ok(waist + (ratio * ratio - 1.0).max(0.0).sqrt() / self.xi())
    }

    /// Wavefunction in the rest-of-motion coordinate zeta = z - v0 t,
    /// without the carrier phase.
    pub fn envelope(&self, zeta: f64, t: f64) -> Complex64 {
        let s = self.complex_width_sq(t);
        let s0 = self.sigma_z0 * self.sigma_z0;
        let pref = 1.0 / ((2.0 * std::f64::consts::PI * s0).powf(0.25) * (s / s0).sqrt());
        let z = zeta + self.electron.v0 * self.t_emit;
        pref * (-(z * z) / (4.0 * s)).exp()
    }

    /// Full lab-frame wavefunction including the carrier exp(i(p0 z - E0 t)/hbar).
    pub fn wavefunction(&self, z: f64, t: f64) -> Complex64 {
        let e = &self.electron;
        let phase = (e.p0 * z - e.energy0 * t) / HBAR;
        self.envelope(z - e.v0 * t, t) * Complex64::from_polar(1.0, phase)
    }

    /// Probability density at a fixed plane as a function of arrival time offset.
    pub fn arrival_density(&self, t_rel: f64, drift: f64) -> f64 {
        let st = self.sigma_t_at(drift);
        let t = t_rel - self.t_emit;
        (-t * t / (2.0 * st * st)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * st)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::trapezoid;

    fn packet(sigma: f64) -> GaussianWavepacket {
        GaussianWavepacket::new(RelativisticElectron::from_beta(0.7).unwrap(), sigma).unwrap()
    }

    #[test]
    fn kinematics_are_consistent() {
        let e = RelativisticElectron::from_beta(0.7).unwrap();
        assert!((e.gamma0 - 1.400_280_084_028_01).abs() < 1e-12);
        assert!((e.p0 - e.gamma0 * ELECTRON_MASS * e.v0).abs() < 1e-40);
        assert!(RelativisticElectron::from_beta(1.0).is_err());
        assert!(RelativisticElectron::from_beta(0.0).is_err());
        let k = RelativisticElectron::from_kinetic_energy_ev(200e3).unwrap();
        assert!((k.beta0 - 0.695).abs() < 1e-3);
    }

    #[test]
    fn quadratic_expansion_is_accurate_within_spread() {
        let wp = packet(100e-9);
        for k in [-3.0, -1.0, 0.0, 2.0, 3.0] {
            let d = wp.electron.dispersion_energy(wp.electron.p0 + k * wp.sigma_p0());
            assert!(d.relative_error() < 1e-12, "{}", d.relative_error());
        }
    }

    #[test]
    fn spreading_law() {
        let wp = packet(200e-9);
        for t in [0.0, 1e-12, 1e-11, 1e-10] {
            let expect = wp.sigma_z0 * (1.0 + (wp.xi() * t).powi(2)).sqrt();
            assert!((wp.sigma_z_at(t) / expect - 1.0).abs() < 1e-12);
        }
        let t = wp.drift_time_for_width(3.0 * wp.sigma_z0).unwrap();
        assert!((wp.sigma_z_at(t) / (3.0 * wp.sigma_z0) - 1.0).abs() < 1e-12);
        assert!(wp.drift_time_for_width(0.5 * wp.sigma_z0).is_err());
    }

    #[test]
    fn chirp_moves_the_waist() {
        let wp = packet(200e-9);
        let t_w = 5e-11;
        let chirp = t_w / (2.0 * wp.electron.m_star * HBAR);
        let c = wp.with_chirp(chirp).unwrap();
        assert!((c.chirp_time_offset() + t_w).abs() < 1e-24);
        assert!((c.sigma_z_at(t_w) / c.sigma_z0 - 1.0).abs() < 1e-12);
        assert!(c.sigma_z_at(0.0) > c.sigma_z0);
        assert!(c.sigma_z_at(2.0 * t_w) > c.sigma_z0);
        // Shifted copy of the unchirped law.
        for dt in [1e-12, 2e-11] {
            assert!((c.sigma_z_at(t_w + dt) / wp.sigma_z_at(dt) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn envelope_is_normalized_and_matches_width() {
        let wp = packet(150e-9);
        let t = 3.0 / wp.xi();
        let s = wp.sigma_z_at(t);
        let n = 4001;
        let h = 16.0 * s / (n - 1) as f64;
        let dens: Vec<f64> = (0..n)
            .map(|i| wp.envelope(-8.0 * s + h * i as f64, t).norm_sqr())
            .collect();
        assert!((trapezoid(&dens, h) - 1.0).abs() < 1e-10);
        let second: Vec<f64> = (0..n)
            .map(|i| {
                let z = -8.0 * s + h * i as f64;
                z * z * dens[i]
            })
            .collect();
        assert!((trapezoid(&second, h).sqrt() / s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn arrival_density_integrates_to_one() {
        let wp = packet(150e-9);
        let st = wp.sigma_t_at(0.0);
        let n = 2001;
        let h = 16.0 * st / (n - 1) as f64;
        let d: Vec<f64> = (0..n).map(|i| wp.arrival_density(-8.0 * st + h * i as f64, 0.0)).collect();
        assert!((trapezoid(&d, h) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_width() {
        let e = RelativisticElectron::from_beta(0.5).unwrap();
        assert!(GaussianWavepacket::new(e, 0.0).is_err());
        assert!(GaussianWavepacket::new(e, f64::NAN).is_err());
    }
}
