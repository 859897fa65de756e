//! Cross-module checks through the public API.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use qwrad::constants::{ELEMENTARY_CHARGE, SPEED_OF_LIGHT};
use qwrad::ensemble::{monte_carlo_stimulated, pulse_spontaneous_spectrum, pulse_stimulated_energy, PulseSpec};
use qwrad::gridfile::Grid;
use qwrad::numerics::{fwhm, linspace};
use qwrad::radiation::{spontaneous_spectrum, Dispersion, InputWave, RadiationModeSpec};
use qwrad::scenario::ScenarioConfig;
use qwrad::smith_purcell::{spectral_map, spr_wavelength, stimulated_map, GratingSpec, MapAxes, MapChannel, SprSource};
use qwrad::{BunchingSpectrum, Complex64, GaussianWavepacket, ModulatedState, ModulationSpec, RelativisticElectron};

const BETA: f64 = 0.7;

fn v0() -> f64 {
    BETA * SPEED_OF_LIGHT
}

fn synchronous_mode() -> RadiationModeSpec {
    RadiationModeSpec::new(1e7, 1e3, Complex64::new(1.0, 0.0), 9e-6, Dispersion::Synchronous { v: v0() }).unwrap()
}

fn single_line(l: i32, omega_b: f64, sigma_t: f64) -> BunchingSpectrum {
    BunchingSpectrum {
        coefficients: BTreeMap::from([(l, Complex64::new(0.0, -0.58))]),
        omega_b,
        drift_time: 0.0,
        sigma_t,
        t0e: 0.0,
        t0_mod: 0.0,
    }
}

fn fig4_bunching() -> BunchingSpectrum {
    ScenarioConfig::preset("fig4").unwrap().resolve().unwrap().bunching().unwrap()
}

#[test]
fn superradiant_line_width_is_set_by_the_pulse() {
    let bs = fig4_bunching();
    let pulse = PulseSpec::gaussian(1000, 20e-15, 0.0, 1).unwrap();
    let mode = synchronous_mode();
    let w = linspace(0.98 * bs.omega_b, 1.02 * bs.omega_b, 4001);
    let sr: Vec<f64> = w
        .iter()
        .map(|&x| pulse_spontaneous_spectrum(&pulse, &mode, v0(), &bs, x).unwrap().superradiant)
        .collect();
    let peak = (0..sr.len()).max_by(|a, b| sr[*a].total_cmp(&sr[*b])).unwrap();
    let width = fwhm(&w, &sr, peak).unwrap();
    let ln2 = 2f64.ln().sqrt() * 2.0;
    assert_relative_eq!(width, ln2 / bs.sigma_t.hypot(pulse.sigma), max_relative = 1e-4);
    assert_relative_eq!(width, ln2 / pulse.sigma, max_relative = 0.05);
    let n = pulse.n_electrons as f64;
    let line = spontaneous_spectrum(&mode, v0(), &bs, bs.omega_b).unwrap();
    let at_line = pulse_spontaneous_spectrum(&pulse, &mode, v0(), &bs, bs.omega_b).unwrap();
    assert_relative_eq!(at_line.superradiant, n * n * line, max_relative = 1e-12);
}

#[test]
fn single_electron_and_unmodulated_reductions() {
    let mode = synchronous_mode();
    let bs = fig4_bunching();
    let one = PulseSpec::gaussian(1, 20e-15, 0.0, 1).unwrap();
    for x in linspace(0.5 * bs.omega_b, 2.5 * bs.omega_b, 17) {
        let s = pulse_spontaneous_spectrum(&one, &mode, v0(), &bs, x).unwrap();
        assert_relative_eq!(s.total, spontaneous_spectrum(&mode, v0(), &bs, x).unwrap(), max_relative = 1e-12);
    }

    let e = RelativisticElectron::from_beta(BETA).unwrap();
    let wp = GaussianWavepacket::new(e, 1e-6).unwrap();
    let st = ModulatedState::new(wp, ModulationSpec::new(0.0, bs.omega_b).unwrap()).unwrap();
    let t = 3e-11;
    let flat = BunchingSpectrum::from_state(&st, t, 4);
    let plain = BunchingSpectrum::unmodulated(wp.sigma_t_at(t), 0.0, bs.omega_b);
    let pulse = PulseSpec::gaussian(500, 20e-15, 0.0, 1).unwrap();
    // Away from the harmonics, where the Gaussian tails of B_l are negligible.
    for x in linspace(1e13, 0.7 * bs.omega_b, 17) {
        let a = pulse_spontaneous_spectrum(&pulse, &mode, v0(), &flat, x).unwrap().total;
        let b = pulse_spontaneous_spectrum(&pulse, &mode, v0(), &plain, x).unwrap().total;
        assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-300);
    }
}

/// Peak stimulated transfer over the wave phase.
fn stimulated_amplitude(pulse: &PulseSpec, mode: &RadiationModeSpec, bs: &BunchingSpectrum, omega0: f64) -> f64 {
    let w = InputWave::new(1e6, omega0, 0.0).unwrap();
    let q = InputWave { phi0: FRAC_PI_2, ..w };
    pulse_stimulated_energy(pulse, mode, v0(), bs, &w)
        .unwrap()
        .hypot(pulse_stimulated_energy(pulse, mode, v0(), bs, &q).unwrap())
}

#[test]
fn detuning_by_inverse_pulse_length() {
    let omega_b = 2.35e15;
    let bs = single_line(1, omega_b, 0.0);
    let pulse = PulseSpec::gaussian(1000, 20e-15, 0.0, 1).unwrap();
    let mode = synchronous_mode();
    let on = stimulated_amplitude(&pulse, &mode, &bs, omega_b);
    let off = stimulated_amplitude(&pulse, &mode, &bs, omega_b + 1.0 / pulse.sigma);
    assert_relative_eq!(off / on, (-0.5f64).exp(), max_relative = 1e-12);
    let expected = 1000.0 * ELEMENTARY_CHARGE * 1e6 * mode.length * 0.58;
    assert_relative_eq!(on, expected, max_relative = 1e-12);
}

#[test]
fn random_arrival_times_cancel_stimulated_transfer() {
    let omega0 = 2.35e15;
    let bs = BunchingSpectrum::unmodulated(0.0, 0.0, omega0);
    let pulse = PulseSpec::gaussian(1000, 50.0 / omega0, 0.0, 7).unwrap();
    let mode = synchronous_mode();
    let wave = InputWave::new(1e6, omega0, 0.3).unwrap();
    let trials = 400;
    let (mean, se) = monte_carlo_stimulated(&pulse, &mode, v0(), &bs, &wave, trials).unwrap();
    let single = ELEMENTARY_CHARGE * 1e6 * mode.length;
    let n = pulse.n_electrons as f64;
    let expected_se = single * (n / 2.0).sqrt() / (trials as f64).sqrt();
    assert!(mean.abs() < 4.0 * se, "{mean} {se}");
    assert!((se / expected_se - 1.0).abs() < 0.15, "{se} {expected_se}");
}

fn spr_axes() -> MapAxes {
    MapAxes {
        lambda_min: 0.35e-6,
        lambda_max: 2.6e-6,
        n_lambda: 1600,
        theta_divisions: 120,
    }
}

#[test]
fn quantum_map_is_classical_times_envelope_cutoff() {
    let grating = GratingSpec::new(1e-6, 9, 3).unwrap();
    let sigma_t = 0.22e-6 / v0();
    let src = SprSource::new(grating, BETA, sigma_t);
    let c = spectral_map(&src, &spr_axes(), MapChannel::Classical).unwrap();
    let q = spectral_map(&src, &spr_axes(), MapChannel::Quantum).unwrap();
    let nl = c.lambda.len();
    for (k, (a, b)) in c.values.iter().zip(&q.values).enumerate() {
        let w = 2.0 * PI * SPEED_OF_LIGHT / c.lambda[k % nl];
        if *a > 0.0 {
            assert_relative_eq!(b / a, (-(w * sigma_t).powi(2)).exp(), max_relative = 1e-12);
        }
    }
}

#[test]
fn ridge_wavelength_grows_with_angle() {
    for m in 1..=3 {
        let lam: Vec<f64> = linspace(0.01, PI - 0.01, 200)
            .into_iter()
            .map(|th| spr_wavelength(1e-6, BETA, th, m))
            .collect();
        assert!(lam.windows(2).all(|p| p[1] > p[0]));
    }
}

#[test]
fn stimulated_map_carries_half_the_spontaneous_exponent() {
    let omega_b = 2.0 * PI * SPEED_OF_LIGHT / 0.6e-6;
    let sigma_t = 0.22e-6 / v0();
    let grating = GratingSpec::new(1e-6, 9, 1).unwrap();
    let src = SprSource::new(grating.clone(), BETA, sigma_t).with_bunching(single_line(1, omega_b, sigma_t));
    let axes = spr_axes();
    let e0 = 1e6;
    let sp = spectral_map(&src, &axes, MapChannel::Modulated).unwrap();
    let s0 = stimulated_map(&src, &axes, e0, 0.0, 0.0).unwrap();
    let s1 = stimulated_map(&src, &axes, e0, FRAC_PI_2, 0.0).unwrap();
    let amp = ELEMENTARY_CHARGE * e0 * grating.length();
    let floor = 1e-6 * sp.max();
    let mut checked = 0;
    for k in 0..sp.values.len() {
        if sp.values[k] > floor {
            let st2 = s0.values[k].powi(2) + s1.values[k].powi(2);
            assert_relative_eq!(st2 / sp.values[k], amp * amp, max_relative = 1e-9);
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn grid_file_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.bin");
    let g = Grid::new(vec![1.0, 2.0], vec![0.5, 1.5, 2.5], (0..6).map(|i| i as f64 * 0.1).collect()).unwrap();
    g.write(std::fs::File::create(&path).unwrap()).unwrap();
    let back = Grid::read(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, g);
}
