//! Subcommand implementations. Each returns the populated output set; the
//! caller writes the manifest.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use qwrad::bunching::{micro_bunch_fwhm, scan_drift};
use qwrad::constants::SPEED_OF_LIGHT;
use qwrad::ensemble::{analytic_bunching, monte_carlo_bunching, monte_carlo_stimulated, pulse_spontaneous_spectrum, pulse_stimulated_energy};
use qwrad::gridfile::Grid;
use qwrad::modulation::optimal_drift_time;
use qwrad::numerics::linspace;
use qwrad::radiation::{spontaneous_spectrum, spontaneous_spectrum_coherent};
use qwrad::scenario::ResolvedScenario;
use qwrad::smith_purcell::{
    cutoff_window, detect_spots, revival_spots, spectral_map, stimulated_map, Linewidths, MapChannel, SpectralMap,
};
use qwrad::{wigner_function, ModulatedState, WignerRequest};
use serde_json::json;

use crate::config::Invalid;
use crate::output::{num, Format, Outputs};

fn require_modulation(r: &ResolvedScenario, what: &str) -> Result<ModulatedState> {
    match r.modulated_state()? {
        Some(s) => Ok(s),
        None => Err(Invalid(format!("{what} needs modulation.enabled = true")).into()),
    }
}

/// Drift time used as the reference for relative drift factors.
fn reference_drift(r: &ResolvedScenario, st: &ModulatedState) -> Result<f64> {
    Ok(match r.optimal_drift {
        Some(od) => od.refined,
        None => optimal_drift_time(st)?.refined,
    })
}

pub fn wavepacket(r: &ResolvedScenario, out: &mut Outputs) -> Result<()> {
    let wp = &r.packet;
    let horizon = (2.0 * r.drift_time).max(3.0 / wp.xi());
    out.csv(
        "width.csv",
        &["t", "sigma_z", "sigma_t"],
        linspace(0.0, horizon, 201)
            .into_iter()
            .map(|t| vec![num(t), num(wp.sigma_z_at(t)), num(wp.sigma_t_at(t))]),
    )?;
    let t = r.drift_time;
    let reach = 6.0 * wp.sigma_z_at(t);
    let zeta = linspace(-reach, reach, 4001);
    let st = r.modulated_state()?;
    let density: Vec<f64> = match &st {
        Some(s) => zeta.iter().map(|&z| s.density(z, t)).collect(),
        None => zeta.iter().map(|&z| wp.envelope(z, t).norm_sqr()).collect(),
    };
    out.csv(
        "density.csv",
        &["zeta", "density"],
        zeta.iter().zip(&density).map(|(z, d)| vec![num(*z), num(*d)]),
    )?;
    let fwhm = match &st {
        Some(s) => Some(micro_bunch_fwhm(s, t)?),
        None => None,
    };
    out.json(
        "wavepacket.json",
        &json!({
            "sigma_z0": wp.sigma_z0,
            "sigma_p0": wp.sigma_p0(),
            "xi": wp.xi(),
            "drift_time": t,
            "sigma_z_at_drift": wp.sigma_z_at(t),
            "sigma_t_at_drift": wp.sigma_t_at(t),
            "optimal_drift": r.optimal_drift,
            "micro_bunch_fwhm": fwhm,
        }),
    )
}

pub fn wigner(r: &ResolvedScenario, out: &mut Outputs, format: Format) -> Result<()> {
    let st = require_modulation(r, "wigner")?;
    let t_ref = reference_drift(r, &st)?;
    let (nz, np) = r.wigner_grid;
    let mut summary = Vec::new();
    for (k, &f) in r.wigner_drift_factors.iter().enumerate() {
        let t = f * t_ref;
        let g = wigner_function(&st, t, &WignerRequest::new(nz, np))?;
        let grid = Grid::new(g.zeta.clone(), g.p.clone(), g.values.clone())?;
        if format.csv() {
            out.matrix_csv(&format!("wigner_{k}.csv"), "p\\zeta", &grid)?;
        }
        if format.bin() {
            out.grid(&format!("wigner_{k}.bin"), &grid)?;
        }
        summary.push(json!({
            "index": k,
            "drift_factor": f,
            "drift_time": t,
            "total": g.total(),
            "max_imag": g.max_imag,
        }));
    }
    out.json("wigner.json", &json!({ "reference_drift": t_ref, "grids": summary }))
}

pub fn bunching(r: &ResolvedScenario, out: &mut Outputs, scan: bool) -> Result<()> {
    let bs = r.bunching()?;
    out.csv(
        "bl.csv",
        &["l", "re", "im", "abs"],
        bs.coefficients.keys().map(|&l| {
            let b = bs.coefficient(l);
            vec![l.to_string(), num(b.re), num(b.im), num(b.norm())]
        }),
    )?;
    let (w0, w1, nw) = r.omega_axis;
    out.csv(
        "b_omega.csv",
        &["omega", "re", "im", "abs"],
        linspace(w0, w1, nw).into_iter().map(|w| {
            let b = bs.at(w);
            vec![num(w), num(b.re), num(b.im), num(b.norm())]
        }),
    )?;
    if scan {
        let st = require_modulation(r, "bunching --scan-drift")?;
        let t_ref = reference_drift(r, &st)?;
        let (f0, f1, n) = r.drift_scan;
        let times: Vec<f64> = linspace(f0 * t_ref, f1 * t_ref, n);
        let mut rows = Vec::new();
        let mut interior = Vec::new();
        for l in 1..=r.l_max.max(1) as i32 {
            let s = scan_drift(&st, l, &times);
            let abs: Vec<f64> = s.iter().map(|(_, b)| b.norm()).collect();
            let peak = (0..abs.len()).max_by(|a, b| abs[*a].total_cmp(&abs[*b])).unwrap_or(0);
            interior.push(json!({ "l": l, "peak_factor": times[peak] / t_ref, "peak_abs": abs[peak],
                "interior": peak > 0 && peak + 1 < abs.len() }));
            rows.extend(s.into_iter().map(|(t, b)| {
                vec![num(t), num(t / t_ref), l.to_string(), num(b.re), num(b.im), num(b.norm())]
            }));
        }
        out.csv("drift_scan.csv", &["t", "t_over_opt", "l", "re", "im", "abs"], rows)?;
        out.json("drift_scan.json", &json!({ "reference_drift": t_ref, "peaks": interior }))?;
    }
    Ok(())
}

fn omega_of(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

pub fn spectrum(r: &ResolvedScenario, out: &mut Outputs, resolved_json: serde_json::Value) -> Result<()> {
    let src = r.spr_source()?;
    let theta = r.cut_theta;
    let omegas: Vec<f64> = r.axes.lambda_axis().into_iter().map(omega_of).collect();
    let mut channels = vec![MapChannel::Classical, MapChannel::Quantum];
    if src.bunching.is_some() {
        channels.push(MapChannel::Modulated);
    }
    let mut rows = Vec::new();
    let mut series = serde_json::Map::new();
    for ch in channels {
        let mut values = Vec::with_capacity(omegas.len());
        for &w in &omegas {
            let (v, l, m) = src.spontaneous(ch, theta, w)?;
            rows.push(vec![num(w), num(v), ch.name().to_string(), l.to_string(), m.to_string()]);
            values.push(v);
        }
        series.insert(ch.name().into(), json!(values));
    }
    let ext: Vec<f64> = omegas.iter().map(|w| (-(w * src.sigma_t).powi(2)).exp()).collect();
    for (w, v) in omegas.iter().zip(&ext) {
        rows.push(vec![num(*w), num(*v), "extinction".into(), "0".into(), "0".into()]);
    }
    series.insert("extinction".into(), json!(ext));
    out.csv("spectrum.csv", &["omega", "value", "channel", "l", "m"], rows)?;

    // Single-mode spectrum of the configured radiation mode.
    let bs = r.bunching()?;
    let v0 = r.electron.v0;
    let (w0, w1, nw) = r.omega_axis;
    let mut mode_rows = Vec::new();
    for w in linspace(w0, w1, nw) {
        let l = (w / bs.omega_b).round() as i32;
        let l = if bs.coefficients.contains_key(&l) { l } else { 0 };
        mode_rows.push(vec![num(w), num(spontaneous_spectrum(&r.mode, v0, &bs, w)?), "spontaneous".into(), l.to_string(), "0".into()]);
        mode_rows.push(vec![
            num(w),
            num(spontaneous_spectrum_coherent(&r.mode, v0, &bs, w)?),
            "spontaneous_coherent".into(),
            l.to_string(),
            "0".into(),
        ]);
    }
    out.csv("mode_spectrum.csv", &["omega", "value", "channel", "l", "m"], mode_rows)?;
    out.json(
        "spectrum.json",
        &json!({ "provenance": resolved_json, "theta": theta, "omega": omegas, "channels": series }),
    )
}

fn write_map(out: &mut Outputs, format: Format, map: &SpectralMap, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let name = map.channel.name();
    if format.csv() {
        let nl = map.lambda.len();
        for (j, th) in map.theta.iter().enumerate() {
            for (i, lam) in map.lambda.iter().enumerate() {
                let (l, m) = map.labels[j * nl + i];
                rows.push(vec![num(*lam), num(*th), name.to_string(), num(map.values[j * nl + i]), l.to_string(), m.to_string()]);
            }
        }
    }
    if format.bin() {
        let grid = Grid::new(map.lambda.clone(), map.theta.clone(), map.values.clone())?;
        out.grid(&format!("map_{name}.bin"), &grid)?;
    }
    Ok(())
}

const MAP_HEADER: [&str; 6] = ["lambda", "theta", "channel", "value", "l", "m"];

pub fn spr_map(r: &ResolvedScenario, out: &mut Outputs, format: Format) -> Result<()> {
    let src = r.spr_source()?;
    let mut channels = vec![MapChannel::Classical, MapChannel::Quantum];
    if src.bunching.is_some() {
        channels.push(MapChannel::Modulated);
    }
    let mut rows = Vec::new();
    let mut spots = Vec::new();
    for ch in channels {
        let map = spectral_map(&src, &r.axes, ch)?;
        if ch == MapChannel::Modulated {
            spots = detect_spots(&map, r.spot_threshold);
        }
        write_map(out, format, &map, &mut rows)?;
    }
    if format.csv() {
        out.csv("map.csv", &MAP_HEADER, rows)?;
    }
    let sigma_z = r.sigma_t_grating * r.electron.v0;
    let cutoff = if sigma_z > 0.0 {
        Some(cutoff_window(&r.grating, r.electron.beta0, sigma_z)?)
    } else {
        None
    };
    let (predicted, linewidths) = match &src.bunching {
        Some(b) => {
            let p = revival_spots(&r.grating, r.electron.beta0, b.omega_b, r.l_max as u32, None);
            let lw: Vec<Linewidths> = p
                .iter()
                .map(|s| Linewidths::new(r.grating.n_g, s.m, b.omega_b, r.sigma_t_grating, s.l as u32))
                .collect();
            (p, lw)
        }
        None => (Vec::new(), Vec::new()),
    };
    out.json(
        "spots.json",
        &json!({
            "sigma_z_over_lambda_g": sigma_z / r.grating.lambda_g,
            "beta0": r.electron.beta0,
            "n_g": r.grating.n_g,
            "detected": spots,
            "predicted": predicted,
            "linewidths": linewidths,
            "cutoff": cutoff,
        }),
    )
}

pub fn stimulated(r: &ResolvedScenario, out: &mut Outputs, format: Format) -> Result<()> {
    let src = r.spr_source()?;
    let map = stimulated_map(&src, &r.axes, r.wave.e0, r.wave.phi0, r.packet.t_emit)?;
    let mut rows = Vec::new();
    write_map(out, format, &map, &mut rows)?;
    if format.csv() {
        out.csv("stimulated_map.csv", &MAP_HEADER, rows)?;
    }
    Ok(())
}

pub fn ensemble(r: &ResolvedScenario, out: &mut Outputs) -> Result<()> {
    let p = &r.pulse;
    let bs = r.bunching()?;
    let lines: Vec<i32> = if r.modulation.is_some() { vec![0, 1] } else { vec![0] };
    let mut rows = Vec::new();
    for &l in &lines {
        for &so in &r.sigma_omega {
            let w_eff = if p.sigma > 0.0 { so / p.sigma } else { 0.0 };
            let an = analytic_bunching(p, l, w_eff, r.pair_model)?;
            let mc = monte_carlo_bunching(p, l, w_eff, r.pulse_trials)?;
            rows.push(vec![
                l.to_string(),
                num(l as f64 * bs.omega_b + w_eff),
                num(an.mean_b2),
                num(mc.mean_b2),
                num(mc.std_err),
                mc.n_trials.to_string(),
                p.seed.to_string(),
            ]);
        }
    }
    out.csv("estimates.csv", &["l", "omega", "analytic", "mc_mean", "mc_stderr", "n_trials", "seed"], rows)?;

    let v0 = r.electron.v0;
    let (w0, w1, nw) = r.omega_axis;
    let mut spec = Vec::new();
    for w in linspace(w0, w1, nw) {
        let s = pulse_spontaneous_spectrum(p, &r.mode, v0, &bs, w)?;
        spec.push(vec![num(w), num(s.shot_noise), num(s.superradiant), num(s.total)]);
    }
    out.csv("pulse_spectrum.csv", &["omega", "shot_noise", "superradiant", "total"], spec)?;

    let analytic = pulse_stimulated_energy(p, &r.mode, v0, &bs, &r.wave)?;
    let (mc, se) = monte_carlo_stimulated(p, &r.mode, v0, &bs, &r.wave, r.pulse_trials)?;
    out.json(
        "stimulated.json",
        &json!({ "analytic": analytic, "mc_mean": mc, "mc_stderr": se, "n_trials": r.pulse_trials, "seed": p.seed }),
    )
}

pub fn check_trials(r: &ResolvedScenario) -> Result<()> {
    if r.pulse_trials < qwrad::ensemble::MIN_TRIALS {
        bail!(Invalid(format!(
            "pulse.trials = {} is below the minimum {}",
            r.pulse_trials,
            qwrad::ensemble::MIN_TRIALS
        )));
    }
    Ok(())
}
