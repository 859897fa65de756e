//! Wigner quasi-distribution of a modulated state on a phase-space grid.
//!
//! For every momentum row the autocorrelation `phi*(p+u) phi(p-u)` is sampled
//! on a symmetric u-grid and transformed with one FFT. The u spacing is tied to
//! the zeta spacing, `du = pi hbar / (M dzeta)`, so that summing a row over
//! zeta returns |phi(p)|^2 exactly.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::modulation::ModulatedState;

/// Grid request. Windows default to the extent of the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerRequest {
    pub n_zeta: usize,
    pub n_p: usize,
    /// Half width of the zeta window, m.
    pub zeta_half_width: Option<f64>,
    /// Half width of the momentum window, kg m/s.
    pub p_half_width: Option<f64>,
}

impl WignerRequest {
    pub fn new(n_zeta: usize, n_p: usize) -> Self {
        Self {
            n_zeta,
            n_p,
            zeta_half_width: None,
            p_half_width: None,
        }
    }
}

/// Sampled Wigner function. `values[i_p * zeta.len() + i_zeta]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub drift_time: f64,
    /// zeta = z - v0 t, m.
    pub zeta: Vec<f64>,
    /// p - p0, kg m/s.
    pub p: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest imaginary part dropped from the transform (rounding level).
    pub max_imag: f64,
}

impl WignerGrid {
    pub fn d_zeta(&self) -> f64 {
        self.zeta[1] - self.zeta[0]
    }

    pub fn d_p(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    pub fn value(&self, i_p: usize, i_zeta: usize) -> f64 {
        self.values[i_p * self.zeta.len() + i_zeta]
    }

    /// Integral over zeta for each momentum row.
    pub fn p_marginal(&self) -> Vec<f64> {
        let nz = self.zeta.len();
        let dz = self.d_zeta();
        self.values
            .chunks(nz)
            .map(|row| row.iter().sum::<f64>() * dz)
            .collect()
    }

    /// Integral over momentum for each zeta column (trapezoid in p).
    pub fn zeta_marginal(&self) -> Vec<f64> {
        let nz = self.zeta.len();
        let np = self.p.len();
        let dp = self.d_p();
        let mut out = vec![0.0; nz];
        for (i, row) in self.values.chunks(nz).enumerate() {
            let w = if i == 0 || i == np - 1 { 0.5 } else { 1.0 };
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        out.iter_mut().for_each(|v| *v *= dp);
        out
    }

    /// Double integral over the grid.
    pub fn total(&self) -> f64 {
        self.zeta_marginal().iter().sum::<f64>() * self.d_zeta()
    }
}

/// Momentum half-width that holds the comb to 1e-14 in weight.
pub fn default_p_half_width(state: &ModulatedState) -> f64 {
    let n_sig = significant_order(state, 1e-14);
    n_sig as f64 * state.delta_p + 7.0 * state.packet.sigma_p0()
}

/// Zeta half-width beyond which the density is below ~1e-9 of its peak scale.
pub fn default_zeta_half_width(state: &ModulatedState, t: f64) -> f64 {
    let sz = state.packet.sigma_z_at(t);
    let d1 = (state.delta_p * t / state.packet.electron.m_star).abs();
    let n_max = state.n_max() as i32;
    let mut reach: f64 = 6.0 * sz;
    for n in -n_max..=n_max {
        let w = state.coefficient(n).norm_sqr() * 1e9;
        if w > 1.0 {
            reach = reach.max(n.abs() as f64 * d1 + sz * (2.0 * w.ln()).sqrt() + sz);
        }
    }
    reach
}

fn significant_order(state: &ModulatedState, threshold: f64) -> usize {
    let n_max = state.n_max() as i32;
    (0..=n_max)
        .rev()
        .find(|&n| {
            state.coefficient(n).norm_sqr() > threshold || state.coefficient(-n).norm_sqr() > threshold
        })
        .unwrap_or(0) as usize
}

/// Wigner function W(zeta, p) at drift time `t`.
///
/// Fails with [`Error::UnderResolved`] when the requested point counts cannot
/// cover both windows without aliasing; the message gives the minimum counts.
pub fn wigner_function(state: &ModulatedState, t: f64, req: &WignerRequest) -> Result<WignerGrid> {
    if req.n_zeta < 8 || req.n_zeta % 2 != 0 || req.n_p < 8 {
        return Err(Error::Precondition(
            "Wigner grid needs an even n_zeta >= 8 and n_p >= 8".into(),
        ));
    }
    let p_half = req.p_half_width.unwrap_or_else(|| default_p_half_width(state));
    let z_half = req
        .zeta_half_width
        .unwrap_or_else(|| default_zeta_half_width(state, t));
    let m = req.n_zeta;
    let dz = 2.0 * z_half / m as f64;
    let du = std::f64::consts::PI * HBAR / (m as f64 * dz);
    let dp = 2.0 * p_half / (req.n_p - 1) as f64;

    // The u-grid must reach the autocorrelation support |u| <= p_half and the
    // p-grid alias distance pi hbar / dp must exceed the zeta extent.
    let need_zeta = (4.0 * z_half * p_half / (std::f64::consts::PI * HBAR)).ceil() as usize;
    let need_p = (2.0 * p_half * z_half / (std::f64::consts::PI * HBAR)).ceil() as usize + 1;
    if m < need_zeta || req.n_p < need_p {
        return Err(Error::UnderResolved(format!(
            "Wigner grid {}x{} too coarse for zeta window +-{z_half:.3e} m and p window +-{p_half:.3e} kg m/s; need n_zeta >= {} and n_p >= {}",
            m,
            req.n_p,
            need_zeta + need_zeta % 2,
            need_p
        )));
    }

    let zeta: Vec<f64> = (0..m).map(|j| (j as f64 - (m / 2) as f64) * dz).collect();
    let p: Vec<f64> = (0..req.n_p).map(|i| -p_half + dp * i as f64).collect();
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(m);
    let half = (m / 2) as i64;
    let norm = du / (std::f64::consts::PI * HBAR);

    let rows: Vec<(Vec<f64>, f64)> = p
        .par_iter()
        .map(|&pi| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for s in -half..=half {
                let u = s as f64 * du;
                let mut f = state.momentum_amplitude(pi + u, t).conj() * state.momentum_amplitude(pi - u, t);
                if s.abs() == half {
                    f *= 0.5;
                }
                buf[s.rem_euclid(m as i64) as usize] += f;
            }
            fft.process(&mut buf);
            // Reorder so that zeta runs from -M/2 to M/2 - 1.
            let mut row = vec![0.0; m];
            let mut imag: f64 = 0.0;
            for (j, r) in row.iter_mut().enumerate() {
                let k = (j as i64 - half).rem_euclid(m as i64) as usize;
                *r = buf[k].re * norm;
                imag = imag.max((buf[k].im * norm).abs());
            }
            (row, imag)
        })
        .collect();

    let max_imag = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let values = rows.into_iter().flat_map(|r| r.0).collect();
    Ok(WignerGrid {
        drift_time: t,
        zeta,
        p,
        values,
        max_imag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::ModulationSpec;
    use crate::wavepacket::{GaussianWavepacket, RelativisticElectron};

    fn state(sigma: f64, g2: f64) -> ModulatedState {
        let e = RelativisticElectron::from_beta(0.7).unwrap();
        let wp = GaussianWavepacket::new(e, sigma).unwrap();
        let spec = ModulationSpec::from_photon_energy_ev(g2, 1.55).unwrap();
        ModulatedState::new(wp, spec).unwrap()
    }

    #[test]
    fn gaussian_wigner_matches_closed_form() {
        let st = state(0.2e-6, 0.0);
        let g = wigner_function(&st, 0.0, &WignerRequest::new(128, 129)).unwrap();
        let sz = st.packet.sigma_z0;
        let sp = st.packet.sigma_p0();
        let peak = 1.0 / (std::f64::consts::PI * HBAR);
        for i_p in (0..129).step_by(16) {
            for i_z in (0..128).step_by(16) {
                let z = g.zeta[i_z];
                let p = g.p[i_p];
                let exact = peak * (-z * z / (2.0 * sz * sz) - p * p / (2.0 * sp * sp)).exp();
                assert!((g.value(i_p, i_z) - exact).abs() < 1e-10 * peak);
            }
        }
    }

    #[test]
    fn marginals_and_norm() {
        let st = state(0.15e-6, 11.4);
        let t = 1.5e-11;
        let g = wigner_function(&st, t, &WignerRequest::new(512, 256)).unwrap();
        assert!((g.total() - 1.0).abs() < 1e-6);
        let pm = g.p_marginal();
        let pmax = pm.iter().cloned().fold(0.0, f64::max);
        for (i, v) in pm.iter().enumerate() {
            let exact = st.momentum_amplitude(g.p[i], t).norm_sqr();
            assert!((v - exact).abs() < 1e-9 * pmax);
        }
        let zm = g.zeta_marginal();
        let zmax = zm.iter().cloned().fold(0.0, f64::max);
        for (j, v) in zm.iter().enumerate() {
            let exact = st.wavefunction(g.zeta[j], t).norm_sqr();
            assert!((v - exact).abs() < 1e-6 * zmax, "{j}: {v} vs {exact}");
        }
        assert!(g.max_imag < 1e-9 * g.values.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let st = state(0.15e-6, 11.4);
        let err = wigner_function(&st, 3e-11, &WignerRequest::new(64, 64)).unwrap_err();
        assert!(matches!(err, Error::UnderResolved(_)));
        assert!(err.to_string().contains("need n_zeta"));
    }
}
