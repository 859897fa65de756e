//! Bunching (form-factor) coefficients of a modulated, drifted wavepacket.
//!
//! With arrival time `t = -zeta / v0` at a fixed plane the density factorizes
//! into a Gaussian envelope times a periodic modulation
//! `f_mod(t) = sum_l B_l exp(-i l omega_b t)`, where
//! `B_l = int rho(zeta) exp(-i l k_b zeta) dzeta` and `k_b = omega_b / v0`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulation::ModulatedState;

/// B_l at drift time `t`, closed form over all sideband pairs.
///
/// Includes the comb phase `exp(i l omega_b t0_mod)`.
pub fn fourier_coefficient(state: &ModulatedState, l: i32, t: f64) -> Complex64 {
    state.raw_overlap(l, t) * state.normalization().powi(2)
}

/// Sampling of the real-space density used by [`oracle_coefficients`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    pub samples_per_period: usize,
    /// Half window in units of the density RMS width plus the sideband spread.
    pub half_width_sigmas: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self {
            samples_per_period: 128,
            half_width_sigmas: 8.0,
        }
    }
}

/// Independent estimate of B_0..=B_{l_max}: sample the density from the
/// explicit sideband-pair sum and project it onto the harmonics with one FFT.
pub fn oracle_coefficients(
    state: &ModulatedState,
    t: f64,
    l_max: usize,
    grid: &OracleGrid,
) -> Result<Vec<Complex64>> {
    if grid.samples_per_period < 2 * l_max + 2 {
        return Err(Error::UnderResolved(format!(
            "oracle needs more than {} samples per period for l_max = {l_max}",
            2 * l_max + 1
        )));
    }
    let k_b = state.delta_p / crate::constants::HBAR;
    let lambda_b = 2.0 * std::f64::consts::PI / k_b;
    let d1 = (state.delta_p * t / state.packet.electron.m_star).abs();
    let half = grid.half_width_sigmas * state.packet.sigma_z_at(t) + state.n_max() as f64 * d1;
    let periods = (2.0 * half / lambda_b).ceil() as usize + 1;
    let s = grid.samples_per_period;
    let n = periods * s;
    let h = lambda_b / s as f64;
    let z0 = -0.5 * (n as f64) * h;
    let mut buf: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| Complex64::new(state.density(z0 + h * j as f64, t), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok((0..=l_max)
        .map(|l| {
            let phase = Complex64::from_polar(1.0, -(l as f64) * k_b * z0);
            buf[l * periods] * h * phase
        })
        .collect())
}

/// Fourier coefficients of the density divided by its Gaussian envelope over
/// the central period. Measures how well the envelope/modulation
/// factorization holds; equals `B_l` when it is exact.
pub fn factorized_coefficients(
    state: &ModulatedState,
    t: f64,
    l_max: usize,
    samples_per_period: usize,
) -> Vec<Complex64> {
    let k_b = state.delta_p / crate::constants::HBAR;
    let lambda_b = 2.0 * std::f64::consts::PI / k_b;
    let s = samples_per_period;
    let h = lambda_b / s as f64;
    let sz = state.packet.sigma_z_at(t);
    let env = |z: f64| (-z * z / (2.0 * sz * sz)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sz);
    let f: Vec<f64> = (0..s)
        .map(|j| {
            let z = -0.5 * lambda_b + h * j as f64;
            state.density(z, t) / env(z)
        })
        .collect();
    (0..=l_max)
        .map(|l| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in f.iter().enumerate() {
                let z = -0.5 * lambda_b + h * j as f64;
                acc += v * Complex64::from_polar(1.0, -(l as f64) * k_b * z);
            }
            acc / s as f64
        })
        .collect()
}

/// Full width at half maximum, in time, of the tallest micro-bunch within
/// one modulation period of the packet centre.
pub fn micro_bunch_fwhm(state: &ModulatedState, t: f64) -> Result<f64> {
    let k_b = state.delta_p / crate::constants::HBAR;
    let lambda_b = 2.0 * std::f64::consts::PI / k_b;
    let n = 4096;
    let h = 2.0 * lambda_b / n as f64;
    let z: Vec<f64> = (0..=n).map(|i| -lambda_b + h * i as f64).collect();
    let rho: Vec<f64> = z.par_iter().map(|&x| state.density(x, t)).collect();
    let (lo, hi) = (n / 4, 3 * n / 4);
    let peak = (lo..=hi)
        .max_by(|a, b| rho[*a].total_cmp(&rho[*b]))
        .unwrap_or(n / 2);
    crate::numerics::fwhm(&z, &rho, peak)
        .map(|w| w / state.packet.electron.v0)
        .ok_or_else(|| Error::Convergence("micro-bunch does not fall to half maximum within one period".into()))
}

/// |B_l| and B_l over a set of drift times.
pub fn scan_drift(state: &ModulatedState, l: i32, times: &[f64]) -> Vec<(f64, Complex64)> {
    times
        .par_iter()
        .map(|&t| (t, fourier_coefficient(state, l, t)))
        .collect()
}

/// Bunching of a modulated packet as seen at the grating.
///
/// Coefficients are stored without the comb phase, which is applied from
/// `t0_mod` when the spectrum is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BunchingSpectrum {
    /// Bare B_l for l = -l_max ..= l_max.
    pub coefficients: BTreeMap<i32, Complex64>,
    pub omega_b: f64,
    pub drift_time: f64,
    /// RMS envelope duration at the grating, s.
    pub sigma_t: f64,
    /// Envelope arrival time, s.
    pub t0e: f64,
    /// Modulation time offset, s.
    pub t0_mod: f64,
}

impl BunchingSpectrum {
    pub fn from_state(state: &ModulatedState, drift_time: f64, l_max: usize) -> Self {
        let t0_mod = state.spec.t0_mod;
        let omega_b = state.spec.omega_b;
        let l_max = l_max as i32;
        let coefficients = (-l_max..=l_max)
            .map(|l| {
                let b = fourier_coefficient(state, l, drift_time)
                    * Complex64::from_polar(1.0, -(l as f64) * omega_b * t0_mod);
                (l, b)
            })
            .collect();
        Self {
            coefficients,
            omega_b,
            drift_time,
            sigma_t: state.packet.sigma_t_at(drift_time),
            t0e: state.packet.t_emit,
            t0_mod,
        }
    }

    /// Unmodulated Gaussian packet: only B_0 = 1.
    pub fn unmodulated(sigma_t: f64, t0e: f64, omega_b: f64) -> Self {
        Self {
            coefficients: BTreeMap::from([(0, Complex64::new(1.0, 0.0))]),
            omega_b,
            drift_time: 0.0,
            sigma_t,
            t0e,
            t0_mod: 0.0,
        }
    }

    /// B_l including the comb phase exp(i l omega_b t0_mod).
    pub fn coefficient(&self, l: i32) -> Complex64 {
        self.coefficients.get(&l).copied().unwrap_or_default()
            * Complex64::from_polar(1.0, l as f64 * self.omega_b * self.t0_mod)
    }

    pub fn l_max(&self) -> i32 {
        self.coefficients.keys().map(|l| l.abs()).max().unwrap_or(0)
    }

    /// Spectral form factor B(omega) at the entrance plane.
    pub fn at(&self, omega: f64) -> Complex64 {
        self.at_position(omega, 0.0, 1.0)
    }

    /// Spectral form factor at axial position `z` for velocity `v0`.
    pub fn at_position(&self, omega: f64, z: f64, v0: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&l, &b) in &self.coefficients {
            let d = omega - l as f64 * self.omega_b;
            let g = (-0.5 * self.sigma_t * self.sigma_t * d * d).exp();
            if g == 0.0 {
                continue;
            }
            let ph = d * self.t0e + l as f64 * self.omega_b * self.t0_mod;
            acc += b * g * Complex64::from_polar(1.0, ph);
        }
        acc * Complex64::from_polar(1.0, omega * z / v0)
    }

    /// sigma_t omega_b; harmonic lines are resolved when this exceeds ~3.
    pub fn line_separation(&self) -> f64 {
        self.sigma_t * self.omega_b
    }

    pub fn lines_well_separated(&self) -> bool {
        self.line_separation() >= 3.0
    }
}

/// Upper harmonic index T_b / (2 pi sigma) supported by a bunch of RMS duration `sigma`.
pub fn harmonic_cutoff(period: f64, sigma: f64) -> f64 {
    period / (2.0 * std::f64::consts::PI * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::{optimal_drift_time, ModulationSpec};
    use crate::wavepacket::{GaussianWavepacket, RelativisticElectron};
    use proptest::prelude::*;

    fn state(sigma: f64, t0: f64) -> ModulatedState {
        let e = RelativisticElectron::from_beta(0.7).unwrap();
        let wp = GaussianWavepacket::new(e, sigma).unwrap();
        let spec = ModulationSpec::from_photon_energy_ev(11.4, 1.55).unwrap().with_t0(t0).unwrap();
        ModulatedState::new(wp, spec).unwrap()
    }

    #[test]
    fn zeroth_coefficient_is_unity() {
        for sigma in [0.12e-6, 0.3e-6, 1e-6] {
            let st = state(sigma, 0.0);
            for t in [0.0, 1e-11, 3e-11] {
                assert!((fourier_coefficient(&st, 0, t) - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn oracle_agrees_with_closed_form() {
        let st = state(1e-6, 0.0);
        let t = 2.9e-11;
        let o = oracle_coefficients(&st, t, 5, &OracleGrid::default()).unwrap();
        for l in 0..=5 {
            let b = fourier_coefficient(&st, l as i32, t);
            assert!((o[l] - b).norm() < 1e-8, "l={l}: {} vs {}", o[l], b);
        }
    }

    #[test]
    fn factorization_holds_for_long_packets() {
        let st = state(1e-6, 0.0);
        let t = 2.9e-11;
        let f = factorized_coefficients(&st, t, 3, 256);
        for l in 0..=3 {
            let b = fourier_coefficient(&st, l as i32, t);
            assert!((f[l] - b).norm() < 1e-2, "l={l}");
        }
    }

    #[test]
    fn comb_phase_rotates_coefficients() {
        let omega_b = crate::constants::omega_from_ev(1.55);
        let t0 = 0.37 / omega_b;
        let a = state(1e-6, 0.0);
        let b = state(1e-6, t0);
        let t = 2.5e-11;
        for l in -3..=3 {
            let expect = fourier_coefficient(&a, l, t) * Complex64::from_polar(1.0, l as f64 * 0.37);
            assert!((fourier_coefficient(&b, l, t) - expect).norm() < 1e-12);
        }
        let sa = BunchingSpectrum::from_state(&a, t, 4);
        let sb = BunchingSpectrum::from_state(&b, t, 4);
        for l in -4..=4 {
            assert!((sa.coefficients[&l] - sb.coefficients[&l]).norm() < 1e-12);
        }
    }

    #[test]
    fn spectrum_peaks_at_harmonics() {
        let st = state(1e-6, 0.0);
        let od = optimal_drift_time(&st).unwrap();
        let bs = BunchingSpectrum::from_state(&st, od.refined, 6);
        assert!(bs.lines_well_separated());
        let w = bs.omega_b;
        assert!((bs.at(w).norm() - bs.coefficient(1).norm()).abs() < 1e-6);
        assert!((bs.at(0.0).norm() - 1.0).abs() < 1e-6);
        assert!(bs.at(0.5 * w).norm() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn conjugate_symmetry_and_bound(sigma in 0.12e-6f64..2e-6, t in 0.0f64..6e-11, l in 1i32..8) {
            let st = state(sigma, 0.0);
            let bp = fourier_coefficient(&st, l, t);
            let bm = fourier_coefficient(&st, -l, t);
            prop_assert!((bp - bm.conj()).norm() < 1e-12);
            prop_assert!(bp.norm() <= 1.0 + 1e-12);
        }
    }
}
