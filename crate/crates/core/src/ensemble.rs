//! Multi-electron pulses: arrival-time statistics, shot noise, superradiance
//! and stimulated superradiance.
//!
//! Electrons in a pulse share the single-electron wavefunction shape but
//! arrive at random times t_j drawn from the pulse distribution. The pulse
//! bunching factor is b(omega) = (1/N) sum_j exp(i omega t_j).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bunching::BunchingSpectrum;
use crate::error::{ensure_finite, ensure_non_negative, Error, Result};
use crate::radiation::{spontaneous_spectrum, stimulated_energy, InputWave, RadiationModeSpec};

/// Minimum Monte Carlo trials accepted.
pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseDistribution {
    /// Normal with standard deviation `sigma` about `t0`.
    Gaussian,
    /// Piecewise-linear density on sorted sample times (relative to t0).
    Tabulated { times: Vec<f64>, density: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub n_electrons: u64,
    /// RMS arrival-time spread, s.
    pub sigma: f64,
    /// Mean arrival time, s.
    pub t0: f64,
    pub distribution: PulseDistribution,
    pub seed: u64,
}

impl PulseSpec {
    pub fn gaussian(n_electrons: u64, sigma: f64, t0: f64, seed: u64) -> Result<Self> {
        if n_electrons == 0 {
            return Err(Error::Precondition("pulse needs at least one electron".into()));
        }
        ensure_non_negative("pulse sigma", sigma)?;
        ensure_finite("pulse t0", t0)?;
        Ok(Self {
            n_electrons,
            sigma,
            t0,
            distribution: PulseDistribution::Gaussian,
            seed,
        })
    }

    pub fn with_electrons(&self, n: u64) -> Self {
        Self {
            n_electrons: n,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    Analytic,
    MonteCarlo,
}

/// Mean pulse bunching factor and its mean square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BunchingEstimate {
    pub l: i32,
    pub omega_eff: f64,
    pub mean_b: Complex64,
    pub mean_b2: f64,
    pub source: EstimateSource,
    pub n_trials: usize,
    /// Standard error of `mean_b2` (zero for analytic estimates).
    pub std_err: f64,
}

/// ⟨|b|^2⟩ model for finite N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairModel {
    /// 1/N + (1 - 1/N) exp(-sigma^2 omega^2).
    Exact,
    /// 1/N + exp(-sigma^2 omega^2).
    LargeN,
}

/// Closed-form Gaussian-pulse averages at `omega_eff` (for harmonic l use
/// omega - l omega_b).
pub fn analytic_bunching(pulse: &PulseSpec, l: i32, omega_eff: f64, model: PairModel) -> Result<BunchingEstimate> {
    if pulse.distribution != PulseDistribution::Gaussian {
        return Err(Error::Precondition(
            "closed-form pulse averages need a Gaussian distribution".into(),
        ));
    }
    let n = pulse.n_electrons as f64;
    let s2w2 = (pulse.sigma * omega_eff).powi(2);
    let pair = (-s2w2).exp();
    let mean_b2 = match model {
        PairModel::Exact => 1.0 / n + (1.0 - 1.0 / n) * pair,
        PairModel::LargeN => 1.0 / n + pair,
    };
    Ok(BunchingEstimate {
        l,
        omega_eff,
        mean_b: Complex64::from_polar((-0.5 * s2w2).exp(), omega_eff * pulse.t0),
        mean_b2,
        source: EstimateSource::Analytic,
        n_trials: 0,
        std_err: 0.0,
    })
}

/// Arrival-time sampler for one trial.
enum Sampler {
    Gaussian(Normal<f64>),
    Table { cdf: Vec<f64>, times: Vec<f64>, t0: f64 },
}

impl Sampler {
    fn new(pulse: &PulseSpec) -> Result<Self> {
        match &pulse.distribution {
            PulseDistribution::Gaussian => Normal::new(pulse.t0, pulse.sigma)
                .map(Sampler::Gaussian)
                .map_err(|e| Error::Precondition(e.to_string())),
            PulseDistribution::Tabulated { times, density } => {
                if times.len() < 2 || times.len() != density.len() || density.iter().any(|d| *d < 0.0 || !d.is_finite()) {
                    return Err(Error::Precondition(
                        "tabulated pulse needs matching times/density arrays with non-negative density".into(),
                    ));
                }
                let mut cdf = vec![0.0];
                for i in 1..times.len() {
                    let dt = times[i] - times[i - 1];
                    if dt <= 0.0 {
                        return Err(Error::Precondition("tabulated pulse times must increase".into()));
                    }
                    cdf.push(cdf[i - 1] + 0.5 * (density[i] + density[i - 1]) * dt);
                }
                let total = *cdf.last().unwrap();
                if total <= 0.0 {
                    return Err(Error::Precondition("tabulated pulse density integrates to zero".into()));
                }
                cdf.iter_mut().for_each(|c| *c /= total);
                Ok(Sampler::Table {
                    cdf,
                    times: times.clone(),
                    t0: pulse.t0,
                })
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Gaussian(n) => n.sample(rng),
            Sampler::Table { cdf, times, t0 } => {
                let u: f64 = rng.random();
                let i = cdf.partition_point(|c| *c < u).clamp(1, cdf.len() - 1);
                let f = (u - cdf[i - 1]) / (cdf[i] - cdf[i - 1]).max(f64::MIN_POSITIVE);
                t0 + times[i - 1] + f * (times[i] - times[i - 1])
            }
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Run `n_trials` independent pulses, each with its own RNG stream, and map
/// every trial's arrival times to a value. Results come back in trial order
/// regardless of thread scheduling.
pub fn run_trials<T, F>(pulse: &PulseSpec, n_trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    if n_trials < MIN_TRIALS {
        return Err(Error::Precondition(format!(
            "Monte Carlo needs at least {MIN_TRIALS} trials, got {n_trials}"
        )));
    }
    let sampler = Sampler::new(pulse)?;
    let n = pulse.n_electrons as usize;
    Ok((0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(pulse.seed, trial);
            let times: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
            f(&times)
        })
        .collect())
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of ⟨b⟩ and ⟨|b|^2⟩.
pub fn monte_carlo_bunching(pulse: &PulseSpec, l: i32, omega_eff: f64, n_trials: usize) -> Result<BunchingEstimate> {
    let n = pulse.n_electrons as f64;
    let bs = run_trials(pulse, n_trials, |times| {
        times
            .iter()
            .map(|t| Complex64::from_polar(1.0, omega_eff * t))
            .sum::<Complex64>()
            / n
    })?;
    let b2: Vec<f64> = bs.iter().map(|b| b.norm_sqr()).collect();
    let (mean_b2, std_err) = mean_and_stderr(&b2);
    Ok(BunchingEstimate {
        l,
        omega_eff,
        mean_b: bs.iter().sum::<Complex64>() / n_trials as f64,
        mean_b2,
        source: EstimateSource::MonteCarlo,
        n_trials,
        std_err,
    })
}

/// Pulse spontaneous spectrum split into incoherent and coherent parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpectrum {
    /// Grows linearly with N.
    pub shot_noise: f64,
    /// Grows with N^2.
    pub superradiant: f64,
    pub total: f64,
}

/// Spectral energy of N electrons with identical wavefunctions and
/// Gaussian-distributed arrival times.
///
/// Each bunching line l contributes its single-electron spectrum times
/// N (1 - e_l) + N^2 e_l with e_l = exp(-sigma_p^2 (omega - l omega_b)^2).
pub fn pulse_spontaneous_spectrum(
    pulse: &PulseSpec,
    mode: &RadiationModeSpec,
    v0: f64,
    electron: &BunchingSpectrum,
    omega: f64,
) -> Result<PulseSpectrum> {
    let n = pulse.n_electrons as f64;
    let mut shot = 0.0;
    let mut coherent = 0.0;
    for (&l, &b) in &electron.coefficients {
        let single_line = BunchingSpectrum {
            coefficients: [(l, b)].into_iter().collect(),
            ..electron.clone()
        };
        let single = spontaneous_spectrum(mode, v0, &single_line, omega)?;
        let d = omega - l as f64 * electron.omega_b;
        let e = (-(pulse.sigma * d).powi(2)).exp();
        shot += n * (1.0 - e) * single;
        coherent += n * n * e * single;
    }
    Ok(PulseSpectrum {
        shot_noise: shot,
        superradiant: coherent,
        total: shot + coherent,
    })
}

/// Mean stimulated energy transfer of the pulse, J.
///
/// Averaging the single-electron transfer over arrival times replaces the
/// envelope width sigma_t by sqrt(sigma_t^2 + sigma_p^2) in the stimulated
/// amplitude and moves the envelope to the pulse centre.
pub fn pulse_stimulated_energy(
    pulse: &PulseSpec,
    mode: &RadiationModeSpec,
    v0: f64,
    electron: &BunchingSpectrum,
    wave: &InputWave,
) -> Result<f64> {
    let averaged = BunchingSpectrum {
        sigma_t: electron.sigma_t.hypot(pulse.sigma),
        t0e: electron.t0e + pulse.t0,
        ..electron.clone()
    };
    Ok(pulse.n_electrons as f64 * stimulated_energy(mode, v0, &averaged, wave)?)
}

/// Monte Carlo mean and standard error of the summed stimulated transfer.
pub fn monte_carlo_stimulated(
    pulse: &PulseSpec,
    mode: &RadiationModeSpec,
    v0: f64,
    electron: &BunchingSpectrum,
    wave: &InputWave,
    n_trials: usize,
) -> Result<(f64, f64)> {
    // The transfer is linear in exp(i omega t_j) per harmonic, so one
    // reference evaluation plus a phase per electron suffices.
    let mut per_line = Vec::new();
    for (&l, &b) in &electron.coefficients {
        let single_line = BunchingSpectrum {
            coefficients: [(l, b)].into_iter().collect(),
            ..electron.clone()
        };
        let re = stimulated_energy(mode, v0, &single_line, wave)?;
        let quarter = InputWave {
            phi0: wave.phi0 + std::f64::consts::FRAC_PI_2,
            ..*wave
        };
        let im = stimulated_energy(mode, v0, &single_line, &quarter)?;
        per_line.push((wave.omega0 - l as f64 * electron.omega_b, Complex64::new(re, im)));
    }
    let totals = run_trials(pulse, n_trials, |times| {
        let mut acc = 0.0;
        for &(d, z) in &per_line {
            for t in times {
                acc += (z * Complex64::from_polar(1.0, d * t)).re;
            }
        }
        acc
    })?;
    Ok(mean_and_stderr(&totals))
}
