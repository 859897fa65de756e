//! PINEM-type energy-comb modulation of a Gaussian wavepacket.
//!
//! After interaction with a laser near field of frequency `omega_b`, the
//! momentum wavefunction becomes a comb of Gaussian sidebands spaced by
//! `delta_p = hbar omega_b / v0` with amplitudes `J_n(2|g|) exp(i n omega_b t0)`.
//! All quantities here are expressed relative to the reference electron,
//! `p' = p - p0` and `zeta = z - v0 t`.

pub mod bessel;
pub mod wigner;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{omega_from_ev, HBAR};
use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::numerics::golden_max;
use crate::wavepacket::GaussianWavepacket;

pub use bessel::{bessel_j, bessel_j_ladder, bessel_j_symmetric};

/// Minimum captured weight sum_n J_n^2 of a truncated sideband ladder.
pub const LADDER_WEIGHT_TOLERANCE: f64 = 1e-10;

/// Laser interaction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationSpec {
    /// Coupling strength 2|g|.
    pub g2: f64,
    /// Laser angular frequency, rad/s.
    pub omega_b: f64,
    /// Interaction time offset t0; sets the comb phase omega_b t0.
    pub t0_mod: f64,
    /// Sidebands kept: n = -n_max ..= n_max.
    pub n_max: usize,
}

impl ModulationSpec {
    pub fn new(g2: f64, omega_b: f64) -> Result<Self> {
        ensure_non_negative("g2", g2)?;
        ensure_positive("omega_b", omega_b)?;
        Ok(Self {
            g2,
            omega_b,
            t0_mod: 0.0,
            n_max: default_n_max(g2),
        })
    }

    pub fn from_photon_energy_ev(g2: f64, energy_ev: f64) -> Result<Self> {
        ensure_positive("photon_energy", energy_ev)?;
        Self::new(g2, omega_from_ev(energy_ev))
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        self.t0_mod = ensure_finite("t0_mod", t0)?;
        Ok(self)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    /// Momentum quantum hbar omega_b / v0 for an electron of velocity `v0`.
    pub fn delta_p(&self, v0: f64) -> f64 {
        HBAR * self.omega_b / v0
    }

    /// Modulation period 2 pi / omega_b.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega_b
    }

    /// Comb phase omega_b t0.
    pub fn phase(&self) -> f64 {
        self.omega_b * self.t0_mod
    }
}

/// Ladder length that keeps more than 1 - 1e-10 of the weight for any g2 in
/// the supported range.
pub fn default_n_max(g2: f64) -> usize {
    (g2 + 4.0 * g2.cbrt() + 16.0).ceil() as usize
}

/// One Gaussian sideband of the modulated momentum comb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandAmplitude {
    pub n: i32,
    /// J_n(g2) exp(i n omega_b t0) times the state normalization.
    pub weight: Complex64,
    /// Sideband centre n delta_p, kg m/s.
    pub center: f64,
}

/// Modulated wavepacket: the Gaussian packet multiplied by the sideband comb.
///
/// Positions are measured from the packet centre; the packet's `t_emit` is
/// not applied here and enters later as the arrival time at the grating.
///
/// Normalization includes the overlap of neighbouring sidebands, which is
/// only negligible when `delta_p >> sigma_p0`. The uncorrected norm is kept in
/// [`ModulatedState::norm_deviation`].
#[derive(Debug, Clone)]
pub struct ModulatedState {
    pub packet: GaussianWavepacket,
    pub spec: ModulationSpec,
    pub delta_p: f64,
    /// Sideband weights c_n, index `n + n_max`.
    coeffs: Vec<Complex64>,
    scale: f64,
    norm_deviation: f64,
}

impl ModulatedState {
    pub fn new(packet: GaussianWavepacket, spec: ModulationSpec) -> Result<Self> {
        let n_max = spec.n_max;
        let j = bessel_j_symmetric(n_max, spec.g2)?;
        let captured: f64 = j.iter().map(|v| v * v).sum();
        if (1.0 - captured) > LADDER_WEIGHT_TOLERANCE {
            return Err(Error::Precondition(format!(
                "sideband ladder |n| <= {n_max} captures only {captured:.12} of the weight for g2 = {}; increase n_max",
                spec.g2
            )));
        }
        let phi = spec.phase();
        let coeffs: Vec<Complex64> = j
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let n = i as f64 - n_max as f64;
                Complex64::from_polar(v, n * phi)
            })
            .collect();
        let mut st = Self {
            packet,
            delta_p: spec.delta_p(packet.electron.v0),
            spec,
            coeffs,
            scale: 1.0,
            norm_deviation: 0.0,
        };
        let raw = st.raw_overlap(0, 0.0).re;
        st.norm_deviation = raw - 1.0;
        st.scale = 1.0 / raw.sqrt();
        Ok(st)
    }

    pub fn n_max(&self) -> usize {
        self.spec.n_max
    }

    /// Sideband weight c_n (unnormalized), zero outside the ladder.
    pub fn coefficient(&self, n: i32) -> Complex64 {
        let idx = n as i64 + self.spec.n_max as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Norm of the plain comb sum minus one. Nonzero when sidebands overlap.
    pub fn norm_deviation(&self) -> f64 {
        self.norm_deviation
    }

    /// Factor applied to the comb so that the state has unit norm.
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    /// delta_p / sigma_p0.
    pub fn sideband_separation(&self) -> f64 {
        self.delta_p / self.packet.sigma_p0()
    }

    /// Dimensionless chirp C sigma_p0^2.
    fn chirp_hat(&self) -> f64 {
        self.packet.chirp * self.packet.sigma_p0().powi(2)
    }

    /// t sigma_p0^2 / (2 m* hbar), the dispersion phase per (p/sigma_p0)^2.
    fn tau_hat(&self, t: f64) -> f64 {
        t * self.packet.sigma_p0().powi(2) / (2.0 * self.packet.electron.m_star * HBAR)
    }

    pub fn sidebands(&self) -> Vec<SidebandAmplitude> {
        let n_max = self.spec.n_max as i32;
        (-n_max..=n_max)
            .map(|n| SidebandAmplitude {
                n,
                weight: self.coefficient(n) * self.scale,
                center: n as f64 * self.delta_p,
            })
            .collect()
    }

    /// Momentum wavefunction phi(p', t) in the drift frame, normalized to
    /// int |phi|^2 dp' = 1.
    pub fn momentum_amplitude(&self, p_rel: f64, t: f64) -> Complex64 {
        let sp = self.packet.sigma_p0();
        let u = p_rel / sp;
        let d = self.delta_p / sp;
        let a = Complex64::new(0.25, -self.chirp_hat());
        let pref = self.scale / (2.0 * std::f64::consts::PI * sp * sp).powf(0.25);
        let mut acc = Complex64::new(0.0, 0.0);
        let n_max = self.spec.n_max as i32;
        // Sidebands further than ~40 sigma contribute nothing.
        let centre = (u / d).round() as i32;
        let reach = (40.0 / d).ceil() as i32 + 1;
        for n in (centre - reach).max(-n_max)..=(centre + reach).min(n_max) {
            let x = u - n as f64 * d;
            acc += self.coefficient(n) * (-a * x * x).exp();
        }
        let disp = -self.tau_hat(t) * u * u;
        pref * acc * Complex64::from_polar(1.0, disp)
    }

    /// Position wavefunction psi(zeta, t) as a sum of displaced, spreading
    /// Gaussian sidebands. Excludes the carrier exp(i(p0 z - E0 t)/hbar).
    pub fn wavefunction(&self, zeta: f64, t: f64) -> Complex64 {
        let s = self.packet.complex_width_sq(t);
        let s0 = self.packet.sigma_z0 * self.packet.sigma_z0;
        let pref = self.scale / ((2.0 * std::f64::consts::PI * s0).powf(0.25) * (s / s0).sqrt());
        let k_b = self.delta_p / HBAR;
        let shift = self.delta_p * t / self.packet.electron.m_star;
        let z0 = zeta;
        let inv4s = 1.0 / (4.0 * s);
        let n_max = self.spec.n_max as i32;
        let mut acc = Complex64::new(0.0, 0.0);
        for n in -n_max..=n_max {
            let c = self.coefficient(n);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let d_n = n as f64 * shift;
            let x = z0 - d_n;
            let phase = n as f64 * k_b * (z0 - 0.5 * d_n);
            acc += c * (-(x * x) * inv4s + Complex64::new(0.0, phase)).exp();
        }
        pref * acc
    }

    /// Lab-frame wavefunction including the carrier phase.
    pub fn wavefunction_lab(&self, z: f64, t: f64) -> Complex64 {
        let e = &self.packet.electron;
        let phase = (e.p0 * z - e.energy0 * t) / HBAR;
        self.wavefunction(z - e.v0 * t, t) * Complex64::from_polar(1.0, phase)
    }

    /// Probability density from the explicit sideband-pair sum. Independent of
    /// [`ModulatedState::wavefunction`] and used to cross-check it.
    pub fn density(&self, zeta: f64, t: f64) -> f64 {
        let s = self.packet.complex_width_sq(t);
        let s0 = self.packet.sigma_z0 * self.packet.sigma_z0;
        let pref = self.scale * self.scale
            / ((2.0 * std::f64::consts::PI).sqrt() * self.packet.sigma_z0 * (s / s0).norm());
        let k_b = self.delta_p / HBAR;
        let shift = self.delta_p * t / self.packet.electron.m_star;
        let z0 = zeta;
        let inv4s = 1.0 / (4.0 * s);
        let inv4s_c = inv4s.conj();
        let n_max = self.spec.n_max as i32;
        let mut total = 0.0;
        for n in -n_max..=n_max {
            let cn = self.coefficient(n);
            if cn.norm_sqr() < 1e-40 {
                continue;
            }
            let xn = z0 - n as f64 * shift;
            let en = -(xn * xn) * inv4s;
            for m in n..=n_max {
                let cm = self.coefficient(m);
                if cm.norm_sqr() < 1e-40 {
                    continue;
                }
                let xm = z0 - m as f64 * shift;
                let phase = (n - m) as f64 * k_b * (z0 - 0.5 * (n + m) as f64 * shift);
                let e = en - xm * xm * inv4s_c + Complex64::new(0.0, phase);
                let term = (cn * cm.conj() * e.exp()).re;
                total += if m == n { term } else { 2.0 * term };
            }
        }
        pref * total
    }

    /// Unnormalized momentum overlap sum_{n,m} c_n* c_m <n| e^{...} |m> that
    /// defines the l-th Fourier coefficient at drift time `t`.
    pub(crate) fn raw_overlap(&self, l: i32, t: f64) -> Complex64 {
        let d = self.delta_p / self.packet.sigma_p0();
        let ch = self.chirp_hat();
        let tau = self.tau_hat(t);
        let lf = l as f64;
        let gauss = 0.125 + 2.0 * ch * ch;
        let damp = -2.0 * lf * lf * d * d * tau * tau;
        let n_max = self.spec.n_max as i32;
        // Pairs with |n - m + l| d beyond ~ 40 are exp(-200) or smaller.
        let reach = ((40.0 / (d * gauss.sqrt() * 8f64.sqrt())).ceil() as i32).max(1);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in -n_max..=n_max {
            let cn = self.coefficient(n).conj();
            if cn.norm_sqr() == 0.0 {
                continue;
            }
            for k in -reach..=reach {
                // k = n - m + l
                let m = n + l - k;
                if m < -n_max || m > n_max {
                    continue;
                }
                let cm = self.coefficient(m);
                let kd = k as f64 * d;
                let re = -kd * kd * gauss + 4.0 * lf * ch * d * tau * kd + damp;
                let im = -lf * d * d * tau * (n + m) as f64;
                acc += cn * cm * Complex64::new(re, im).exp();
            }
        }
        acc
    }
}

/// Drift time at which the first bunching harmonic peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalDrift {
    /// Closed-form estimate T_b p0 / (2 g2 delta_p) from the stationary-phase picture.
    pub estimate: f64,
    /// Numerical argmax of |B_1(t)|.
    pub refined: f64,
    /// |B_1| at the refined time.
    pub b1_max: f64,
}

/// Closed-form estimate of the optimal drift time.
pub fn optimal_drift_estimate(packet: &GaussianWavepacket, spec: &ModulationSpec) -> Result<f64> {
    ensure_positive("g2", spec.g2)?;
    let dp = spec.delta_p(packet.electron.v0);
    Ok(0.5 * spec.period() * packet.electron.p0 / (spec.g2 * dp))
}

/// Estimate and numerically refined drift time maximizing |B_1|.
pub fn optimal_drift_time(state: &ModulatedState) -> Result<OptimalDrift> {
    let est = optimal_drift_estimate(&state.packet, &state.spec)?;
    let b1 = |t: f64| crate::bunching::fourier_coefficient(state, 1, t).norm();
    let n = 281;
    let (lo, hi) = (0.05 * est, 3.0 * est);
    let h = (hi - lo) / (n - 1) as f64;
    let mut best = 0;
    let mut best_v = f64::MIN;
    for i in 0..n {
        let v = b1(lo + h * i as f64);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    if best == 0 || best == n - 1 {
        return Err(Error::Convergence(
            "|B_1| maximum lies on the edge of the drift scan".into(),
        ));
    }
    let a = lo + h * (best - 1) as f64;
    let b = lo + h * (best + 1) as f64;
    let t = golden_max(b1, a, b, 1e-12);
    Ok(OptimalDrift {
        estimate: est,
        refined: t,
        b1_max: b1(t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::trapezoid;
    use crate::wavepacket::RelativisticElectron;

    fn feist(sigma: f64) -> ModulatedState {
        let e = RelativisticElectron::from_beta(0.7).unwrap();
        let wp = GaussianWavepacket::new(e, sigma).unwrap();
        let spec = ModulationSpec::from_photon_energy_ev(11.4, 1.55).unwrap();
        ModulatedState::new(wp, spec).unwrap()
    }

    /// Direct quadrature of (2 pi hbar)^-1/2 int phi(p') exp(i p' zeta / hbar) dp'.
    fn fourier_oracle(st: &ModulatedState, zeta: f64, t: f64) -> Complex64 {
        let sp = st.packet.sigma_p0();
        let half = st.n_max() as f64 * st.delta_p + 12.0 * sp;
        let n = 200_001;
        let h = 2.0 * half / (n - 1) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let p = -half + h * i as f64;
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * st.momentum_amplitude(p, t) * Complex64::from_polar(1.0, p * zeta / HBAR);
        }
        acc * h / (2.0 * std::f64::consts::PI * HBAR).sqrt()
    }

    #[test]
    fn unmodulated_limit_matches_plain_packet() {
        let e = RelativisticElectron::from_beta(0.7).unwrap();
        let wp = GaussianWavepacket::new(e, 300e-9).unwrap();
        let spec = ModulationSpec::new(0.0, omega_from_ev(1.55)).unwrap();
        let st = ModulatedState::new(wp, spec).unwrap();
        let t = 2.0 / wp.xi();
        for z in [-5e-7, 0.0, 2e-7, 9e-7] {
            let a = st.wavefunction(z, t);
            let b = wp.envelope(z, t);
            assert!((a - b).norm() < 1e-10 * b.norm().max(1e3));
        }
    }

    #[test]
    fn position_sum_matches_momentum_integral() {
        let st = feist(0.15e-6);
        let t = 2.6e-11;
        for zeta in [-0.31e-6, -0.05e-6, 0.0, 0.123e-6, 0.4e-6] {
            let a = st.wavefunction(zeta, t);
            let b = fourier_oracle(&st, zeta, t);
            assert!((a - b).norm() < 1e-8 * b.norm().max(1.0), "{zeta}: {a} vs {b}");
        }
    }

    #[test]
    fn density_paths_agree() {
        let st = feist(0.5e-6);
        for t in [0.0, 1e-11, 2.6e-11, 5e-11] {
            for zeta in [-0.8e-6, -0.1e-6, 0.0, 0.37e-6] {
                let a = st.wavefunction(zeta, t).norm_sqr();
                let b = st.density(zeta, t);
                assert!((a - b).abs() < 1e-10 * a.max(1.0), "{t} {zeta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn density_is_normalized_even_with_overlapping_sidebands() {
        // Neighbouring sidebands overlap strongly here, yet the Bessel
        // addition theorem cancels every cross term of the norm.
        let st = feist(0.15e-6);
        assert!(st.norm_deviation().abs() < 1e-12);
        let t = 2.6e-11;
        let w = 8.0 * st.packet.sigma_z_at(t) + st.n_max() as f64 * st.delta_p * t / st.packet.electron.m_star;
        let n = 40_001;
        let h = 2.0 * w / (n - 1) as f64;
        let d: Vec<f64> = (0..n).map(|i| st.wavefunction(-w + h * i as f64, t).norm_sqr()).collect();
        assert!((trapezoid(&d, h) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_bunching_without_dispersion() {
        // With no drift the density equals the unmodulated Gaussian envelope.
        let st = feist(0.5e-6);
        let wp = st.packet;
        for zeta in [-0.7e-6, -0.2e-6, 0.0, 0.3e-6] {
            let a = st.density(zeta, 0.0);
            let b = wp.envelope(zeta, 0.0).norm_sqr();
            assert!((a - b).abs() < 1e-6 * b.max(1e-3 / wp.sigma_z0));
        }
    }

    #[test]
    fn truncation_is_checked() {
        let e = RelativisticElectron::from_beta(0.7).unwrap();
        let wp = GaussianWavepacket::new(e, 1e-6).unwrap();
        let spec = ModulationSpec::from_photon_energy_ev(11.4, 1.55).unwrap().with_n_max(12);
        assert!(matches!(ModulatedState::new(wp, spec), Err(Error::Precondition(_))));
        assert!(default_n_max(11.4) >= 28);
    }

    #[test]
    fn optimal_drift_close_to_estimate() {
        let st = feist(1e-6);
        let od = optimal_drift_time(&st).unwrap();
        assert!((od.estimate - 2.647e-11).abs() < 0.01e-11);
        let r = od.refined / od.estimate;
        assert!(r > 0.75 && r < 1.25, "{r}");
        assert!(od.b1_max > 0.5 && od.b1_max < 0.6);
    }
}
