//! Acceptance suite: each criterion is evaluated on the built-in presets and
//! reported with its measured values and threshold.
//!
//! Wall-clock runtimes are kept out of the serialized report so that two runs
//! produce identical bytes; they are exposed through [`CriterionReport::runtime`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bunching::{harmonic_cutoff, micro_bunch_fwhm, oracle_coefficients, OracleGrid};
use crate::ensemble::{
    analytic_bunching, monte_carlo_bunching, monte_carlo_stimulated, pulse_spontaneous_spectrum,
    pulse_stimulated_energy, PairModel,
};
use crate::error::{Error, Result};
use crate::modulation::bessel::bessel_j_symmetric;
use crate::modulation::wigner::{wigner_function, WignerRequest};
use crate::modulation::{optimal_drift_time, ModulatedState};
use crate::numerics::{fwhm, linspace};
use crate::radiation::{einstein_relation_check, spontaneous_spectrum, stimulated_energy, InputWave};
use crate::scenario::{ResolvedScenario, ScenarioConfig};
use crate::smith_purcell::{
    bunch_periods, bunching_linewidth, cutoff_window, detect_spots, revival_spots, ridge_crest, spectral_map,
    spr_wavelength, stimulated_map, sync_linewidth, CutoffClass, LinewidthLimit, Linewidths, MapChannel,
};
use crate::{fourier_coefficient, BunchingSpectrum};

/// Number of acceptance criteria.
pub const CRITERIA: u32 = 14;

/// Attenuation e^{-(omega sigma_t)^2} of orders 1..3 at normal emission for
/// sigma_z / lambda_G = 0.22 and beta = 0.7.
pub const FIG5B_NORMAL_ATTENUATION: [f64; 3] = [0.14796856712713077, 0.0004793777504886606, 3.400362472485474e-08];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    /// Numerical checks passed. The runtime bound is reported separately.
    pub passed: bool,
    pub threshold: String,
    pub measurements: Vec<Measurement>,
    /// Wall-clock bound in seconds, if the criterion has one.
    pub runtime_limit: Option<f64>,
    #[serde(skip)]
    pub runtime: f64,
}

impl CriterionReport {
    pub fn runtime_ok(&self) -> bool {
        self.runtime_limit.is_none_or(|lim| self.runtime < lim)
    }

    /// Numerical and runtime checks both pass.
    pub fn ok(&self) -> bool {
        self.passed && self.runtime_ok()
    }

    /// One-line summary including the runtime.
    pub fn summary(&self) -> String {
        let m: Vec<String> = self
            .measurements
            .iter()
            .map(|m| format!("{}={:.6e}", m.name, m.value))
            .collect();
        let rt = match self.runtime_limit {
            Some(lim) => format!("{:.3}s (< {lim}s)", self.runtime),
            None => format!("{:.3}s", self.runtime),
        };
        format!(
            "criterion {:>2} {} {}: {} [{}] {}",
            self.id,
            if self.ok() { "PASS" } else { "FAIL" },
            self.name,
            m.join(" "),
            self.threshold,
            rt
        )
    }
}

struct Builder {
    measurements: Vec<Measurement>,
}

impl Builder {
    fn new() -> Self {
        Self { measurements: Vec::new() }
    }

    fn put(&mut self, name: impl Into<String>, value: f64) -> f64 {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
        });
        value
    }
}

fn timed<F>(id: u32, name: &str, threshold: &str, runtime_limit: Option<f64>, f: F) -> CriterionReport
where
    F: FnOnce(&mut Builder) -> Result<bool>,
{
    let start = Instant::now();
    let mut b = Builder::new();
    let passed = match f(&mut b) {
        Ok(p) => p,
        Err(e) => {
            b.measurements.push(Measurement {
                name: format!("error: {e}"),
                value: f64::NAN,
            });
            false
        }
    };
    CriterionReport {
        id,
        name: name.to_string(),
        passed,
        threshold: threshold.to_string(),
        measurements: b.measurements,
        runtime_limit,
        runtime: start.elapsed().as_secs_f64(),
    }
}

fn preset(name: &str) -> Result<ResolvedScenario> {
    ScenarioConfig::preset(name)?.resolve()
}

fn state(r: &ResolvedScenario) -> Result<ModulatedState> {
    r.modulated_state()?
        .ok_or_else(|| Error::Precondition("scenario has no modulation".into()))
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Bessel sum rules at 2|g| = 11.4.
pub fn bessel_sum_rules() -> CriterionReport {
    timed(1, "bessel sum rules", "|dev| < 1e-10", Some(1.0), |b| {
        let n = 60;
        let j = bessel_j_symmetric(n, 11.4)?;
        let norm = b.put("sum_sq_dev", j.iter().map(|v| v * v).sum::<f64>() - 1.0);
        let mut worst: f64 = 0.0;
        for l in -10i64..=10 {
            let mut s = 0.0;
            for k in 0..j.len() as i64 {
                let kl = k + l;
                if kl >= 0 && (kl as usize) < j.len() {
                    s += j[k as usize] * j[kl as usize];
                }
            }
            let target = if l == 0 { 1.0 } else { 0.0 };
            worst = worst.max((s - target).abs());
        }
        let worst = b.put("addition_max_dev", worst);
        Ok(norm.abs() < 1e-10 && worst < 1e-10)
    })
}

/// Closed-form bunching coefficients against the FFT of the density.
pub fn bunching_oracle() -> CriterionReport {
    timed(2, "bunching closed form vs density oracle", "rel < 1e-4", Some(30.0), |b| {
        let r = preset("fig3")?;
        let st = state(&r)?;
        let t_opt = r.drift_time;
        let mut worst: f64 = 0.0;
        for t in linspace(0.2 * t_opt, 2.0 * t_opt, 5) {
            let oracle = oracle_coefficients(&st, t, 5, &OracleGrid::default())?;
            for (l, o) in oracle.iter().enumerate().skip(1) {
                let c = fourier_coefficient(&st, l as i32, t);
                worst = worst.max((o - c).norm() / c.norm());
            }
        }
        Ok(b.put("max_rel_dev", worst) < 1e-4)
    })
}

/// Optimal drift against its estimate and the rise-peak-fall shape.
pub fn optimal_drift() -> CriterionReport {
    timed(3, "optimal drift", "|t/t_est - 1| <= 0.25, peak interior", Some(30.0), |b| {
        let r = preset("fig4")?;
        let st = state(&r)?;
        let od = optimal_drift_time(&st)?;
        let ratio = b.put("t_opt_over_estimate", od.refined / od.estimate);
        let peak = b.put("b1_opt", fourier_coefficient(&st, 1, od.refined).norm());
        let half = b.put("b1_half", fourier_coefficient(&st, 1, 0.5 * od.refined).norm());
        let double = b.put("b1_double", fourier_coefficient(&st, 1, 2.0 * od.refined).norm());
        Ok((ratio - 1.0).abs() <= 0.25 && peak > half && peak > double)
    })
}

/// Wigner normalization and marginals on the fig3 grid.
pub fn wigner_integrity() -> CriterionReport {
    timed(4, "wigner integrity", "dev < 1e-6", Some(60.0), |b| {
        let r = preset("fig3")?;
        let st = state(&r)?;
        let (nz, np) = r.wigner_grid;
        b.put("n_zeta", nz as f64);
        b.put("n_p", np as f64);
        let t = r.drift_time;
        let g = wigner_function(&st, t, &WignerRequest::new(nz, np))?;
        let total = b.put("total_dev", g.total() - 1.0);
        let pm = g.p_marginal();
        let zm = g.zeta_marginal();
        let p_ref: Vec<f64> = g.p.iter().map(|&p| st.momentum_amplitude(p, t).norm_sqr()).collect();
        let z_ref: Vec<f64> = g.zeta.iter().map(|&z| st.wavefunction(z, t).norm_sqr()).collect();
        let p_dev = max_abs(pm.iter().zip(&p_ref).map(|(a, r)| a - r)) / max_abs(p_ref.iter().copied());
        let z_dev = max_abs(zm.iter().zip(&z_ref).map(|(a, r)| a - r)) / max_abs(z_ref.iter().copied());
        let p_dev = b.put("p_marginal_rel_dev", p_dev);
        let z_dev = b.put("zeta_marginal_rel_dev", z_dev);
        let g2 = wigner_function(&st, 0.5 * t, &WignerRequest::new(nz, np))?;
        let pm2 = g2.p_marginal();
        let drift_dev = max_abs(pm.iter().zip(&pm2).map(|(a, c)| a - c)) / max_abs(pm.iter().copied());
        let drift_dev = b.put("p_marginal_drift_dev", drift_dev);
        Ok(total.abs() < 1e-6 && p_dev < 1e-6 && z_dev < 1e-6 && drift_dev < 1e-6)
    })
}

/// Full width of the central micro-bunch at the optimal drift.
pub fn micro_bunch_width() -> CriterionReport {
    timed(5, "micro-bunch width", "75 as +/- 20%", None, |b| {
        let r = preset("fig4")?;
        let w = b.put("fwhm_as", micro_bunch_fwhm(&state(&r)?, r.drift_time)? * 1e18);
        let r3 = preset("fig3")?;
        b.put("fig3_fwhm_as", micro_bunch_fwhm(&state(&r3)?, r3.drift_time)? * 1e18);
        Ok((w / 75.0 - 1.0).abs() <= 0.2)
    })
}

/// Envelope suppression of the unmodulated spontaneous spectrum.
pub fn quantum_cutoff_ratio() -> CriterionReport {
    timed(6, "quantum cutoff ratio", "rel < 1e-12", None, |b| {
        let r = preset("einstein")?;
        let sigma_t = preset("fig5b")?.sigma_t_grating;
        let v0 = r.electron.v0;
        let wide = BunchingSpectrum::unmodulated(sigma_t, 0.0, 1.0);
        let point = BunchingSpectrum::unmodulated(0.0, 0.0, 1.0);
        let mut worst: f64 = 0.0;
        for w in linspace(0.0, 6.0 / sigma_t, 100) {
            let ratio = spontaneous_spectrum(&r.mode, v0, &wide, w)? / spontaneous_spectrum(&r.mode, v0, &point, w)?;
            let expected = (-(w * sigma_t).powi(2)).exp();
            worst = worst.max((ratio / expected - 1.0).abs());
        }
        Ok(b.put("max_rel_dev", worst) < 1e-12)
    })
}

/// Stimulated/spontaneous relation for a point electron at synchronism.
pub fn einstein_relation() -> CriterionReport {
    timed(7, "einstein relation", "residual < 1e-12", Some(1.0), |b| {
        let r = preset("einstein")?;
        let v0 = r.electron.v0;
        let bs = r.bunching()?;
        let check = einstein_relation_check(&r.mode, v0, &bs, &r.wave)?;
        let res = b.put("residual", check.residual);
        let res_p = b.put("residual_pierce", check.residual_pierce);
        // Maximum deceleration: the phase that maximizes the transfer.
        let m = r.mode.matrix_element(v0, r.wave.omega0)? * bs.at(r.wave.omega0);
        let best = InputWave { phi0: m.arg(), ..r.wave };
        let dw = stimulated_energy(&r.mode, v0, &bs, &best)?;
        let res_phase = b.put("residual_at_phase", (dw * dw / check.rhs - 1.0).abs());
        Ok(res < 1e-12 && res_p < 1e-12 && res_phase < 1e-12)
    })
}

/// Classical ridge crests against the grating relation.
pub fn classical_ridges() -> CriterionReport {
    timed(8, "classical ridges", "|crest - prediction| <= 1 cell", None, |b| {
        let r = preset("fig5a")?;
        let src = r.spr_source()?;
        let map = spectral_map(&src, &r.axes, MapChannel::Classical)?;
        let mut ok = true;
        for m in 1..=3u32 {
            for th in [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4] {
                let j = map.theta_index(th);
                let predicted = spr_wavelength(r.grating.lambda_g, r.electron.beta0, map.theta[j], m);
                let off = match ridge_crest(&map, j, predicted) {
                    Some(i) => i as f64 - map.lambda_index(predicted) as f64,
                    None => f64::INFINITY,
                };
                b.put(format!("m{m}_theta{:.0}deg_cells", th.to_degrees()), off);
                ok &= off.abs() <= 1.0;
            }
        }
        Ok(ok)
    })
}

/// Cutoff classes and attenuation of each order for sigma_z / lambda_G = 0.22.
pub fn cutoff_classification() -> CriterionReport {
    timed(
        9,
        "cutoff classification",
        "m1 partial, m2 < 1e-2, m3 < 1e-4 at normal emission",
        None,
        |b| {
            let r = preset("fig5b")?;
            let sigma_z = r.sigma_t_grating * r.electron.v0;
            let window = cutoff_window(&r.grating, r.electron.beta0, sigma_z)?;
            let src = r.spr_source()?;
            let classical = spectral_map(&src, &r.axes, MapChannel::Classical)?;
            let quantum = spectral_map(&src, &r.axes, MapChannel::Quantum)?;
            let j = classical.theta_index(FRAC_PI_2);
            let mut ratios = [0.0; 3];
            let mut ok = true;
            for (k, h) in window.iter().take(3).enumerate() {
                let m = h.m;
                let predicted = spr_wavelength(r.grating.lambda_g, r.electron.beta0, classical.theta[j], m);
                let i = ridge_crest(&classical, j, predicted)
                    .ok_or_else(|| Error::Convergence(format!("no crest for order {m}")))?;
                ratios[k] = b.put(format!("m{m}_crest_ratio"), quantum.value(j, i) / classical.value(j, i));
                b.put(format!("m{m}_normal_attenuation"), h.attenuation_normal);
                b.put(format!("m{m}_best_attenuation"), h.best_attenuation);
                ok &= (h.attenuation_normal / FIG5B_NORMAL_ATTENUATION[k] - 1.0).abs() < 1e-9;
            }
            let classes = [window[0].class, window[1].class, window[2].class];
            ok &= classes == [CutoffClass::PartiallyCut, CutoffClass::BarelyObservable, CutoffClass::Extinct];
            ok &= ratios[1] < 1e-2 && ratios[2] < 1e-4;
            Ok(ok)
        },
    )
}

/// Revival spots of the modulated map.
pub fn revival_spot_positions() -> CriterionReport {
    timed(10, "revival spots", "exactly 3 spots, each within 1 cell", None, |b| {
        let r = preset("fig5d")?;
        let src = r.spr_source()?;
        let map = spectral_map(&src, &r.axes, MapChannel::Modulated)?;
        let spots = detect_spots(&map, r.spot_threshold);
        b.put("n_spots", spots.len() as f64);
        let omega_b = r.modulation.map(|m| m.omega_b).unwrap_or(1.0);
        let predicted = revival_spots(&r.grating, r.electron.beta0, omega_b, r.l_max as u32, None);
        let mut ok = spots.len() == 3;
        for s in &spots {
            let off = predicted
                .iter()
                .find(|p| p.l == s.l && p.m == s.m)
                .map(|p| s.i_theta as f64 - map.theta_index(p.theta) as f64)
                .unwrap_or(f64::INFINITY);
            b.put(format!("l{}m{}_theta_deg", s.l, s.m), s.theta.to_degrees());
            b.put(format!("l{}m{}_cells", s.l, s.m), off);
            ok &= off.abs() <= 1.0;
        }
        // Both readings of the modulated harmonic cutoff.
        let st = state(&r)?;
        let sigma_b = micro_bunch_fwhm(&st, r.drift_time)? / (8.0 * 2f64.ln()).sqrt();
        let period = 2.0 * PI / omega_b;
        b.put("l_cut_micro_bunch", harmonic_cutoff(period, sigma_b));
        b.put("l_cut_envelope", harmonic_cutoff(period, r.sigma_t_grating));
        Ok(ok)
    })
}

/// Spot linewidth in omega against the synchronism and bunching limits.
pub fn linewidth_dominance() -> CriterionReport {
    timed(11, "linewidth dominance", "within 30% of min(1/(m N_G), (2/pi)/(l N_b))", None, |b| {
        let mut ok = true;
        for (name, regime) in [("fig6a", LinewidthLimit::Synchronism), ("fig6b", LinewidthLimit::Bunching)] {
            let r = preset(name)?;
            let src = r.spr_source()?;
            let omega_b = r.modulation.map(|m| m.omega_b).unwrap_or(1.0);
            let spot = revival_spots(&r.grating, r.electron.beta0, omega_b, 1, None)
                .into_iter()
                .find(|s| s.m == 1)
                .ok_or_else(|| Error::Precondition("no (1,1) spot".into()))?;
            let omegas = linspace(0.5 * omega_b, 1.5 * omega_b, 20001);
            let cut: Vec<f64> = omegas
                .iter()
                .map(|&w| src.spontaneous(MapChannel::Modulated, spot.theta, w).map(|v| v.0))
                .collect::<Result<_>>()?;
            let peak = (0..cut.len()).max_by(|a, c| cut[*a].total_cmp(&cut[*c])).unwrap_or(0);
            let width = fwhm(&omegas, &cut, peak)
                .ok_or_else(|| Error::Convergence(format!("{name}: line does not reach half maximum")))?
                / omegas[peak];
            let lw = Linewidths::new(r.grating.n_g, 1, omega_b, r.sigma_t_grating, 1);
            let sync = 1.0 / r.grating.n_g as f64;
            let bunch = (2.0 / PI) / bunch_periods(omega_b, r.sigma_t_grating);
            let expected = sync.min(bunch);
            b.put(format!("{name}_fwhm_rel"), width);
            b.put(format!("{name}_expected_rel"), expected);
            b.put(format!("{name}_n_b"), bunch_periods(omega_b, r.sigma_t_grating));
            b.put(format!("{name}_sync_fwhm_exact"), sync_linewidth(r.grating.n_g, 1));
            b.put(format!("{name}_bunching_fwhm_exact"), bunching_linewidth(omega_b, r.sigma_t_grating, 1));
            ok &= (width / expected - 1.0).abs() <= 0.3 && lw.dominant == regime;
        }
        Ok(ok)
    })
}

/// Pulse statistics: Monte Carlo against closed form and N scaling.
pub fn ensemble_statistics() -> CriterionReport {
    timed(12, "ensemble statistics", "|mc - analytic| <= 3 se; exponents 2, 1 within 1e-6", Some(60.0), |b| {
        let r = preset("appendixD")?;
        let mut ok = true;
        for &so in &r.sigma_omega {
            let w = if r.pulse.sigma > 0.0 { so / r.pulse.sigma } else { 0.0 };
            let an = analytic_bunching(&r.pulse, 1, w, PairModel::Exact)?;
            let mc = monte_carlo_bunching(&r.pulse, 1, w, r.pulse_trials)?;
            let dev = (mc.mean_b2 - an.mean_b2).abs();
            b.put(format!("so{so}_analytic"), an.mean_b2);
            b.put(format!("so{so}_mc"), mc.mean_b2);
            b.put(format!("so{so}_se"), mc.std_err);
            ok &= dev <= 3.0 * mc.std_err || dev <= 1e-12;
        }
        let bs = r.bunching()?;
        let v0 = r.electron.v0;
        let omega = bs.omega_b + 1.0 / r.pulse.sigma;
        let one = pulse_spontaneous_spectrum(&r.pulse, &r.mode, v0, &bs, omega)?;
        let two = pulse_spontaneous_spectrum(&r.pulse.with_electrons(2 * r.pulse.n_electrons), &r.mode, v0, &bs, omega)?;
        let sr = b.put("superradiant_exponent", (two.superradiant / one.superradiant).log2());
        let shot = b.put("shot_noise_exponent", (two.shot_noise / one.shot_noise).log2());
        Ok(ok && (sr - 2.0).abs() < 1e-6 && (shot - 1.0).abs() < 1e-6)
    })
}

/// Largest |f(phi) + f(phi + pi)| over the phase sweep, relative to the
/// largest |f(phi)|.
fn flip_dev<F: Fn(f64) -> Result<f64>>(f: F) -> Result<f64> {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for phi in linspace(0.0, 2.0 * PI, 13) {
        let a = f(phi)?;
        let b = f(phi + PI)?;
        num = num.max((a + b).abs());
        den = den.max(a.abs()).max(b.abs());
    }
    Ok(if den == 0.0 { num } else { num / den })
}

/// Sign change of every stimulated quantity under phi0 -> phi0 + pi.
pub fn stimulated_antisymmetry() -> CriterionReport {
    timed(13, "stimulated phase antisymmetry", "rel < 1e-12", None, |b| {
        let e = preset("einstein")?;
        let single = e.bunching()?;
        let worst = b.put(
            "single",
            flip_dev(|phi0| stimulated_energy(&e.mode, e.electron.v0, &single, &InputWave { phi0, ..e.wave }))?,
        );

        let a = preset("appendixD")?;
        let v0 = a.electron.v0;
        let modulated = a.bunching()?;
        let worst_mod = b.put(
            "modulated",
            flip_dev(|phi0| stimulated_energy(&a.mode, v0, &modulated, &InputWave { phi0, ..a.wave }))?,
        );
        let worst_pulse = b.put(
            "pulse",
            flip_dev(|phi0| pulse_stimulated_energy(&a.pulse, &a.mode, v0, &modulated, &InputWave { phi0, ..a.wave }))?,
        );
        let wave = InputWave { phi0: 1.0, ..a.wave };
        let (mc, _) = monte_carlo_stimulated(&a.pulse, &a.mode, v0, &modulated, &wave, 100)?;
        let (mc_f, _) = monte_carlo_stimulated(&a.pulse, &a.mode, v0, &modulated, &wave.flipped(), 100)?;
        let worst_mc = b.put("pulse_monte_carlo", (mc + mc_f).abs() / mc.abs().max(mc_f.abs()));

        let d = preset("fig5d")?;
        let src = d.spr_source()?;
        let e0 = d.wave.e0;
        let t0e = d.packet.t_emit;
        let m0 = stimulated_map(&src, &d.axes, e0, 0.3, t0e)?;
        let m1 = stimulated_map(&src, &d.axes, e0, 0.3 + PI, t0e)?;
        let scale = max_abs(m0.values.iter().copied());
        let worst_map = b.put(
            "map",
            max_abs(m0.values.iter().zip(&m1.values).map(|(x, y)| x + y)) / scale,
        );
        Ok([worst, worst_mod, worst_pulse, worst_mc, worst_map].iter().all(|v| *v < 1e-12))
    })
}

/// Criteria 1 to 13 in order.
pub fn run_numerical() -> Vec<CriterionReport> {
    vec![
        bessel_sum_rules(),
        bunching_oracle(),
        optimal_drift(),
        wigner_integrity(),
        micro_bunch_width(),
        quantum_cutoff_ratio(),
        einstein_relation(),
        classical_ridges(),
        cutoff_classification(),
        revival_spot_positions(),
        linewidth_dominance(),
        ensemble_statistics(),
        stimulated_antisymmetry(),
    ]
}

/// Serialized report body; excludes runtimes.
pub fn report_json(reports: &[CriterionReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

/// Determinism check: two serialized runs must be byte-identical.
pub fn determinism(first: &str, second: &str) -> CriterionReport {
    timed(14, "determinism", "identical report bytes", None, |b| {
        b.put("bytes", first.len() as f64);
        let differing = first.bytes().zip(second.bytes()).filter(|(x, y)| x != y).count()
            + first.len().abs_diff(second.len());
        Ok(b.put("differing_bytes", differing as f64) == 0.0)
    })
}

/// All criteria. The numerical suite runs twice for the determinism check.
pub fn run_all() -> Result<Vec<CriterionReport>> {
    let mut first = run_numerical();
    let second = run_numerical();
    let c14 = determinism(&report_json(&first)?, &report_json(&second)?);
    first.push(c14);
    Ok(first)
}
