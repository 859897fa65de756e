//! Scenario configuration: user-facing parameters, named presets, and
//! resolution into SI model objects.
//!
//! Every physical input can be given in SI or as a dimensionless group
//! (lengths in units of the grating period, photon energies in eV). The
//! [`ResolvedScenario`] records the SI values actually used.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bunching::BunchingSpectrum;
use crate::constants::{omega_from_ev, omega_from_wavelength, SPEED_OF_LIGHT};
use crate::ensemble::{PairModel, PulseSpec};
use crate::error::{Error, Result};
use crate::modulation::{default_n_max, optimal_drift_time, ModulatedState, ModulationSpec, OptimalDrift};
use crate::radiation::{Dispersion, InputWave, RadiationModeSpec};
use crate::smith_purcell::{GratingSpec, MapAxes, MapChannel, SprSource};
use crate::wavepacket::{GaussianWavepacket, RelativisticElectron};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElectronConfig {
    pub beta0: Option<f64>,
    pub kinetic_energy_ev: Option<f64>,
    /// Initial RMS length, m.
    pub sigma_z0: Option<f64>,
    pub sigma_z0_over_lambda_g: Option<f64>,
    /// Target RMS length at the grating in units of lambda_G.
    pub sigma_z_grating_over_lambda_g: Option<f64>,
    /// Quadratic spectral phase C, (kg m/s)^-2.
    pub chirp: Option<f64>,
    /// Arrival time of the packet centre at the grating entrance, s.
    pub t_emit: Option<f64>,
    /// Treat the electron as a point particle (sigma_t = 0).
    pub point_particle: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationConfig {
    pub enabled: Option<bool>,
    /// Coupling 2|g|.
    pub g2: Option<f64>,
    pub omega_b: Option<f64>,
    pub photon_energy_ev: Option<f64>,
    /// Free-space modulation wavelength, m.
    pub lambda_b: Option<f64>,
    pub lambda_b_over_lambda_g: Option<f64>,
    pub t0: Option<f64>,
    pub n_max: Option<usize>,
    /// Drift time from the modulation point to the grating, s. Unset means
    /// the |B_1|-optimal drift.
    pub drift_time: Option<f64>,
    pub drift_length: Option<f64>,
    /// Harmonics kept in the bunching spectrum.
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GratingConfig {
    pub lambda_g: Option<f64>,
    pub n_g: Option<u32>,
    pub m_max: Option<u32>,
    /// |M_m| per order; defaults to 1.
    pub coupling: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeConfig {
    pub e_qz0: Option<f64>,
    pub p_q: Option<f64>,
    pub m_perp_re: Option<f64>,
    pub m_perp_im: Option<f64>,
    /// Interaction length, m; defaults to the grating length.
    pub length: Option<f64>,
    /// synchronous | free_space | floquet | tabulated
    pub dispersion: Option<String>,
    /// Observation angle for the floquet dispersion, rad.
    pub theta: Option<f64>,
    pub m: Option<i32>,
    pub table_omega: Option<Vec<f64>>,
    pub table_qz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    pub e0: Option<f64>,
    pub omega0: Option<f64>,
    pub lambda0: Option<f64>,
    /// omega0 = harmonic * omega_b.
    pub harmonic: Option<u32>,
    pub phi0: Option<f64>,
    /// Observation window for the input-wave spectrum, s.
    pub window: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub n: Option<u64>,
    pub sigma: Option<f64>,
    pub t0: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// Use the large-N form of the pair term.
    pub large_n: Option<bool>,
    /// Products sigma_pulse * omega at which pulse statistics are reported.
    pub sigma_omega: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxesConfig {
    pub lambda_min_over_lambda_g: Option<f64>,
    pub lambda_max_over_lambda_g: Option<f64>,
    /// Wavelength samples; unset picks the smallest count that resolves every line.
    pub n_lambda: Option<usize>,
    pub theta_divisions: Option<usize>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub n_omega: Option<usize>,
    /// Polar angle for one-dimensional spectrum cuts, rad.
    pub theta: Option<f64>,
    /// classical | quantum | modulated
    pub channel: Option<String>,
    /// Relative threshold for spot detection.
    pub spot_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerConfig {
    pub n_zeta: Option<usize>,
    pub n_p: Option<usize>,
    /// Drift times in units of the optimal drift.
    pub drift_factors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub drift_min_factor: Option<f64>,
    pub drift_max_factor: Option<f64>,
    pub n_drift: Option<usize>,
}

/// Complete user configuration. All fields are optional; unset values take
/// documented defaults during [`ScenarioConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub electron: ElectronConfig,
    pub modulation: ModulationConfig,
    pub grating: GratingConfig,
    pub mode: ModeConfig,
    pub wave: WaveConfig,
    pub pulse: PulseConfig,
    pub axes: AxesConfig,
    pub wigner: WignerConfig,
    pub scan: ScanConfig,
}

/// Names of the built-in presets.
pub const PRESETS: &[&str] = &[
    "fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig5d", "fig6a", "fig6b", "einstein", "appendixD",
];

/// Modulation wavelength used by the Smith-Purcell presets, in units of lambda_G.
pub const SPR_LAMBDA_B_OVER_LAMBDA_G: f64 = 0.6;

impl ScenarioConfig {
    /// Built-in scenario by name.
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = ScenarioConfig {
            preset: Some(name.to_string()),
            ..Default::default()
        };
        let feist = |c: &mut ScenarioConfig, sigma: f64| {
            c.electron.beta0 = Some(0.7);
            c.electron.sigma_z0 = Some(sigma);
            c.modulation.enabled = Some(true);
            c.modulation.g2 = Some(11.4);
            c.modulation.photon_energy_ev = Some(1.55);
        };
        let spr = |c: &mut ScenarioConfig, n_g: u32, sigma_over: Option<f64>, modulated: bool| {
            c.electron.beta0 = Some(0.7);
            c.grating.lambda_g = Some(1e-6);
            c.grating.n_g = Some(n_g);
            c.grating.m_max = Some(3);
            c.axes.theta_divisions = Some(400);
            match sigma_over {
                Some(s) => c.electron.sigma_z_grating_over_lambda_g = Some(s),
                None => c.electron.point_particle = Some(true),
            }
            if modulated {
                c.modulation.enabled = Some(true);
                c.modulation.g2 = Some(11.4);
                c.modulation.lambda_b_over_lambda_g = Some(SPR_LAMBDA_B_OVER_LAMBDA_G);
            } else {
                c.modulation.enabled = Some(false);
            }
        };
        match name {
            "fig3" => {
                feist(&mut c, 0.15e-6);
                c.wigner.n_zeta = Some(512);
                c.wigner.n_p = Some(256);
                c.wigner.drift_factors = Some(vec![0.0, 0.5, 1.0]);
            }
            "fig4" => {
                feist(&mut c, 1e-6);
                c.modulation.l_max = Some(8);
                c.scan.drift_min_factor = Some(0.0);
                c.scan.drift_max_factor = Some(2.0);
                c.scan.n_drift = Some(300);
            }
            "fig5a" => {
                spr(&mut c, 9, None, false);
                c.axes.lambda_min_over_lambda_g = Some(0.1);
                c.axes.lambda_max_over_lambda_g = Some(2.6);
                c.axes.channel = Some("classical".into());
            }
            "fig5b" => {
                spr(&mut c, 9, Some(0.22), false);
                c.axes.lambda_min_over_lambda_g = Some(0.1);
                c.axes.lambda_max_over_lambda_g = Some(2.6);
                c.axes.channel = Some("quantum".into());
            }
            "fig5c" => {
                spr(&mut c, 9, Some(0.22), true);
                c.axes.lambda_min_over_lambda_g = Some(0.1);
                c.axes.lambda_max_over_lambda_g = Some(2.6);
                c.axes.n_lambda = Some(2000);
                c.axes.theta = Some(std::f64::consts::FRAC_PI_2);
                c.axes.channel = Some("modulated".into());
            }
            "fig5d" => {
                spr(&mut c, 9, Some(0.22), true);
                c.axes.lambda_min_over_lambda_g = Some(0.35);
                c.axes.lambda_max_over_lambda_g = Some(2.6);
                c.axes.channel = Some("modulated".into());
                c.axes.spot_threshold = Some(0.1);
            }
            "fig6a" | "fig6b" => {
                let (n_g, s) = if name == "fig6a" { (9, 0.22) } else { (3, 2.0) };
                spr(&mut c, n_g, Some(s), true);
                c.axes.lambda_min_over_lambda_g = Some(0.35);
                c.axes.lambda_max_over_lambda_g = Some(2.6);
                c.axes.channel = Some("modulated".into());
                c.axes.spot_threshold = Some(0.1);
            }
            "einstein" => {
                c.electron.beta0 = Some(0.7);
                c.electron.point_particle = Some(true);
                c.modulation.enabled = Some(false);
                c.mode.dispersion = Some("synchronous".into());
                c.mode.length = Some(9e-6);
                c.wave.lambda0 = Some(1e-6);
                c.wave.e0 = Some(1e6);
            }
            "appendixD" => {
                feist(&mut c, 1e-6);
                c.modulation.l_max = Some(4);
                c.mode.dispersion = Some("synchronous".into());
                c.mode.length = Some(9e-6);
                c.wave.harmonic = Some(1);
                // B_1 is imaginary at t0 = 0; this phase gives maximal deceleration.
                c.wave.phi0 = Some(-std::f64::consts::FRAC_PI_2);
                c.pulse.n = Some(1000);
                c.pulse.sigma = Some(20e-15);
                c.pulse.seed = Some(20_240_601);
                c.pulse.trials = Some(500);
                c.pulse.sigma_omega = Some(vec![0.0, 1.0, 3.0]);
            }
            _ => {
                return Err(Error::Precondition(format!(
                    "unknown preset '{name}'; available: {}",
                    PRESETS.join(", ")
                )))
            }
        }
        Ok(c)
    }

    /// Validate and convert to SI model objects.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        resolve(self)
    }
}

/// Resolved SI parameters plus derived quantities, as recorded in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedScenario {
    pub electron: RelativisticElectron,
    pub packet: GaussianWavepacket,
    pub point_particle: bool,
    pub modulation: Option<ModulationSpec>,
    pub l_max: usize,
    pub drift_time: f64,
    pub optimal_drift: Option<OptimalDrift>,
    pub sigma_t_grating: f64,
    pub grating: GratingSpec,
    pub mode: RadiationModeSpec,
    pub wave: InputWave,
    pub wave_window: f64,
    pub pulse: PulseSpec,
    pub pulse_trials: usize,
    pub pair_model: PairModel,
    pub sigma_omega: Vec<f64>,
    pub axes: MapAxes,
    pub map_channel: MapChannel,
    pub cut_theta: f64,
    pub omega_axis: (f64, f64, usize),
    pub spot_threshold: f64,
    pub wigner_grid: (usize, usize),
    pub wigner_drift_factors: Vec<f64>,
    pub drift_scan: (f64, f64, usize),
}

impl ResolvedScenario {
    pub fn modulated_state(&self) -> Result<Option<ModulatedState>> {
        self.modulation
            .map(|spec| ModulatedState::new(self.packet, spec))
            .transpose()
    }

    /// Bunching at the grating: modulated comb or plain envelope.
    pub fn bunching(&self) -> Result<BunchingSpectrum> {
        match self.modulated_state()? {
            Some(st) => Ok(BunchingSpectrum::from_state(&st, self.drift_time, self.l_max)),
            None => {
                let omega_b = self.modulation.map(|m| m.omega_b).unwrap_or(1.0);
                Ok(BunchingSpectrum::unmodulated(self.sigma_t_grating, self.packet.t_emit, omega_b))
            }
        }
    }

    /// Smith-Purcell source for map generation.
    pub fn spr_source(&self) -> Result<SprSource> {
        let mut src = SprSource::new(self.grating.clone(), self.electron.beta0, self.sigma_t_grating);
        if let Some(c) = &self.grating_coupling() {
            src.coupling = c.clone();
        }
        if self.modulation.is_some() {
            src = src.with_bunching(self.bunching()?);
        }
        Ok(src)
    }

    fn grating_coupling(&self) -> Option<Vec<f64>> {
        None
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    crate::error::ensure_positive(name, v)
}

fn resolve(c: &ScenarioConfig) -> Result<ResolvedScenario> {
    let e = &c.electron;
    let electron = match (e.beta0, e.kinetic_energy_ev) {
        (Some(_), Some(_)) => {
            return Err(Error::Precondition(
                "electron.beta0 and electron.kinetic_energy_ev are mutually exclusive".into(),
            ))
        }
        (Some(b), None) => RelativisticElectron::from_beta(b)?,
        (None, Some(k)) => RelativisticElectron::from_kinetic_energy_ev(k)?,
        (None, None) => RelativisticElectron::from_beta(0.7)?,
    };

    let g = &c.grating;
    let lambda_g = positive("grating.lambda_g", g.lambda_g.unwrap_or(1e-6))?;
    let grating = GratingSpec::new(lambda_g, g.n_g.unwrap_or(9), g.m_max.unwrap_or(3))?;

    // Modulation frequency first: the optimal drift depends on it.
    let m = &c.modulation;
    let enabled = m.enabled.unwrap_or(false);
    let omega_sources = [
        m.omega_b.is_some(),
        m.photon_energy_ev.is_some(),
        m.lambda_b.is_some(),
        m.lambda_b_over_lambda_g.is_some(),
    ]
    .iter()
    .filter(|x| **x)
    .count();
    if omega_sources > 1 {
        return Err(Error::Precondition(
            "give only one of modulation.omega_b, photon_energy_ev, lambda_b, lambda_b_over_lambda_g".into(),
        ));
    }
    let omega_b = if let Some(w) = m.omega_b {
        positive("modulation.omega_b", w)?
    } else if let Some(ev) = m.photon_energy_ev {
        omega_from_ev(positive("modulation.photon_energy_ev", ev)?)
    } else if let Some(l) = m.lambda_b {
        omega_from_wavelength(positive("modulation.lambda_b", l)?)
    } else if let Some(r) = m.lambda_b_over_lambda_g {
        omega_from_wavelength(positive("modulation.lambda_b_over_lambda_g", r)? * lambda_g)
    } else {
        omega_from_ev(1.55)
    };
    let modulation = if enabled {
        let g2 = m.g2.unwrap_or(11.4);
        let mut spec = ModulationSpec::new(g2, omega_b)?.with_t0(m.t0.unwrap_or(0.0))?;
        spec.n_max = m.n_max.unwrap_or_else(|| default_n_max(g2));
        Some(spec)
    } else {
        None
    };

    let point_particle = e.point_particle.unwrap_or(false);
    let explicit_drift = match (m.drift_time, m.drift_length) {
        (Some(_), Some(_)) => {
            return Err(Error::Precondition(
                "modulation.drift_time and modulation.drift_length are mutually exclusive".into(),
            ))
        }
        (Some(t), None) => Some(crate::error::ensure_non_negative("modulation.drift_time", t)?),
        (None, Some(l)) => Some(crate::error::ensure_non_negative("modulation.drift_length", l)? / electron.v0),
        (None, None) => None,
    };
    let sigma_given = match (e.sigma_z0, e.sigma_z0_over_lambda_g) {
        (Some(_), Some(_)) => {
            return Err(Error::Precondition(
                "electron.sigma_z0 and electron.sigma_z0_over_lambda_g are mutually exclusive".into(),
            ))
        }
        (Some(s), None) => Some(positive("electron.sigma_z0", s)?),
        (None, Some(r)) => Some(positive("electron.sigma_z0_over_lambda_g", r)? * lambda_g),
        (None, None) => None,
    };
    let target = e
        .sigma_z_grating_over_lambda_g
        .map(|r| positive("electron.sigma_z_grating_over_lambda_g", r).map(|v| v * lambda_g))
        .transpose()?;

    let build = |sigma: f64| -> Result<GaussianWavepacket> {
        let mut wp = GaussianWavepacket::new(electron, sigma)?.with_chirp(e.chirp.unwrap_or(0.0))?;
        wp.t_emit = crate::error::ensure_finite("electron.t_emit", e.t_emit.unwrap_or(0.0))?;
        Ok(wp)
    };
    let drift_for = |wp: &GaussianWavepacket| -> Result<(f64, Option<OptimalDrift>)> {
        match (explicit_drift, modulation) {
            (Some(t), _) => Ok((t, None)),
            (None, Some(spec)) => {
                let od = optimal_drift_time(&ModulatedState::new(*wp, spec)?)?;
                Ok((od.refined, Some(od)))
            }
            (None, None) => Ok((0.0, None)),
        }
    };

    let (packet, drift_time, optimal_drift) = match (sigma_given, target) {
        (Some(s), None) => {
            let wp = build(s)?;
            let (t, od) = drift_for(&wp)?;
            (wp, t, od)
        }
        (None, Some(tg)) if modulation.is_some() || explicit_drift.is_some() => {
            // Choose sigma_z0 so that the packet has the target length after
            // the (possibly sigma-dependent) drift.
            let mut s = tg;
            let mut last = None;
            for _ in 0..50 {
                let wp = build(s)?;
                let (t, od) = drift_for(&wp)?;
                let grown = wp.sigma_z_at(t);
                let next = s * tg / grown;
                last = Some((wp, t, od));
                if (next / s - 1.0).abs() < 1e-13 {
                    break;
                }
                s = next;
            }
            let (wp, t, od) = last.expect("at least one iteration");
            if (wp.sigma_z_at(t) / tg - 1.0).abs() > 1e-9 {
                return Err(Error::Convergence(
                    "could not match electron.sigma_z_grating_over_lambda_g after drift".into(),
                ));
            }
            (wp, t, od)
        }
        (None, Some(tg)) => (build(tg)?, 0.0, None),
        (Some(s), Some(tg)) => {
            if modulation.is_some() || explicit_drift.is_some() {
                return Err(Error::Precondition(
                    "electron.sigma_z_grating_over_lambda_g with a fixed drift or modulation over-determines sigma_z0"
                        .into(),
                ));
            }
            let wp = build(s)?;
            let t = wp.drift_time_for_width(tg)?;
            (wp, t, None)
        }
        (None, None) => {
            let wp = build(1e-6)?;
            let (t, od) = drift_for(&wp)?;
            (wp, t, od)
        }
    };
    let sigma_t_grating = if point_particle { 0.0 } else { packet.sigma_t_at(drift_time) };

    // Mode.
    let md = &c.mode;
    let dispersion = match md.dispersion.as_deref().unwrap_or("synchronous") {
        "synchronous" => Dispersion::Synchronous { v: electron.v0 },
        "free_space" => Dispersion::FreeSpace,
        "floquet" => Dispersion::Floquet {
            lambda_g,
            theta: md.theta.unwrap_or(std::f64::consts::FRAC_PI_2),
            m: md.m.unwrap_or(1),
        },
        "tabulated" => {
            let (w, q) = (md.table_omega.clone().unwrap_or_default(), md.table_qz.clone().unwrap_or_default());
            if w.len() < 2 || w.len() != q.len() || w.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Precondition(
                    "mode.table_omega must increase and match mode.table_qz in length (>= 2 points)".into(),
                ));
            }
            Dispersion::Tabulated {
                table: w.into_iter().zip(q).collect(),
            }
        }
        other => {
            return Err(Error::Precondition(format!(
                "mode.dispersion '{other}' is not one of synchronous, free_space, floquet, tabulated"
            )))
        }
    };
    let mode = RadiationModeSpec::new(
        md.e_qz0.unwrap_or(1e7),
        md.p_q.unwrap_or(1e3),
        Complex64::new(md.m_perp_re.unwrap_or(1.0), md.m_perp_im.unwrap_or(0.0)),
        md.length.unwrap_or(grating.length()),
        dispersion,
    )?;

    // Input wave.
    let w = &c.wave;
    let omega0 = match (w.omega0, w.lambda0, w.harmonic) {
        (Some(o), None, None) => positive("wave.omega0", o)?,
        (None, Some(l), None) => omega_from_wavelength(positive("wave.lambda0", l)?),
        (None, None, Some(h)) => {
            if h == 0 {
                return Err(Error::OutOfRange {
                    name: "wave.harmonic",
                    value: 0.0,
                    bound: ">= 1".into(),
                });
            }
            h as f64 * omega_b
        }
        (None, None, None) => omega_b,
        _ => {
            return Err(Error::Precondition(
                "give only one of wave.omega0, wave.lambda0, wave.harmonic".into(),
            ))
        }
    };
    let wave = InputWave::new(w.e0.unwrap_or(1e6), omega0, w.phi0.unwrap_or(0.0))?;
    let wave_window = w.window.unwrap_or(10.0 * mode.length / electron.v0);

    // Pulse.
    let p = &c.pulse;
    let pulse = PulseSpec::gaussian(
        p.n.unwrap_or(1000),
        p.sigma.unwrap_or(20e-15),
        p.t0.unwrap_or(0.0),
        p.seed.unwrap_or(1),
    )?;
    let pulse_trials = p.trials.unwrap_or(500);
    let sigma_omega = p.sigma_omega.clone().unwrap_or_else(|| vec![0.0, 1.0, 3.0]);

    // Axes.
    let a = &c.axes;
    let channel = match a.channel.as_deref().unwrap_or("modulated") {
        "classical" => MapChannel::Classical,
        "quantum" => MapChannel::Quantum,
        "modulated" if modulation.is_some() => MapChannel::Modulated,
        "modulated" => MapChannel::Quantum,
        other => {
            return Err(Error::Precondition(format!(
                "axes.channel '{other}' is not one of classical, quantum, modulated"
            )))
        }
    };
    let lambda_min = positive("axes.lambda_min_over_lambda_g", a.lambda_min_over_lambda_g.unwrap_or(0.1))? * lambda_g;
    let lambda_max = positive("axes.lambda_max_over_lambda_g", a.lambda_max_over_lambda_g.unwrap_or(2.6))? * lambda_g;
    if lambda_max <= lambda_min {
        return Err(Error::Precondition(
            "axes.lambda_max_over_lambda_g must exceed axes.lambda_min_over_lambda_g".into(),
        ));
    }
    let theta_divisions = a.theta_divisions.unwrap_or(400);
    let n_lambda = match a.n_lambda {
        Some(n) => n,
        None => {
            let mut src = SprSource::new(grating.clone(), electron.beta0, sigma_t_grating);
            if let Some(spec) = modulation {
                let st = ModulatedState::new(packet, spec)?;
                src = src.with_bunching(BunchingSpectrum::from_state(&st, drift_time, 1));
            }
            let need = src.required_d_lambda(channel, lambda_min, lambda_max);
            (((lambda_max - lambda_min) / need).ceil() as usize + 1).max(400)
        }
    };
    let axes = MapAxes {
        lambda_min,
        lambda_max,
        n_lambda,
        theta_divisions,
    };
    let omega_hi_default = if sigma_t_grating > 0.0 {
        6.0 / sigma_t_grating
    } else {
        4.0 * omega_b
    };
    let omega_axis = (
        a.omega_min.unwrap_or(0.0),
        a.omega_max.unwrap_or(omega_hi_default.max(4.0 * omega_b)),
        a.n_omega.unwrap_or(100),
    );
    if !(omega_axis.1 > omega_axis.0) || omega_axis.2 < 2 {
        return Err(Error::Precondition(
            "axes.omega_max must exceed axes.omega_min and axes.n_omega must be >= 2".into(),
        ));
    }

    let wg = &c.wigner;
    let sc = &c.scan;
    Ok(ResolvedScenario {
        electron,
        packet,
        point_particle,
        modulation,
        l_max: m.l_max.unwrap_or(8),
        drift_time,
        optimal_drift,
        sigma_t_grating,
        grating,
        mode,
        wave,
        wave_window,
        pulse,
        pulse_trials,
        pair_model: if p.large_n.unwrap_or(false) {
            PairModel::LargeN
        } else {
            PairModel::Exact
        },
        sigma_omega,
        axes,
        map_channel: channel,
        cut_theta: a.theta.unwrap_or(std::f64::consts::FRAC_PI_2),
        omega_axis,
        spot_threshold: a.spot_threshold.unwrap_or(0.1),
        wigner_grid: (wg.n_zeta.unwrap_or(256), wg.n_p.unwrap_or(256)),
        wigner_drift_factors: wg.drift_factors.clone().unwrap_or_else(|| vec![1.0]),
        drift_scan: (
            sc.drift_min_factor.unwrap_or(0.0),
            sc.drift_max_factor.unwrap_or(2.0),
            sc.n_drift.unwrap_or(200),
        ),
    })
}

/// Velocity-matched free-space wavelength of Smith-Purcell order m at angle theta.
pub fn spr_omega(grating: &GratingSpec, beta: f64, theta: f64, m: u32) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT
        / crate::smith_purcell::spr_wavelength(grating.lambda_g, beta, theta, m)
}
