//! Single radiation mode driven by a wavepacket: spontaneous, stimulated and
//! input-wave contributions to the spectral energy.
//!
//! The electron couples to a mode `E_q(r) = E_qz0 M_perp exp(i q_z z)` over an
//! interaction length `L`. The detuning `theta = omega / v0 - q_z(omega)`
//! enters through `sinc(theta L / 2)`. All bunching information comes from a
//! [`BunchingSpectrum`]; an unmodulated packet is the one-line spectrum
//! [`BunchingSpectrum::unmodulated`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bunching::BunchingSpectrum;
use crate::constants::{ELEMENTARY_CHARGE, SPEED_OF_LIGHT};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::numerics::{interp_linear, sinc};

/// Axial wavenumber q_z(omega) of the mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    /// q_z = omega / v: phase matched to a particle of velocity `v`.
    Synchronous { v: f64 },
    /// Forward free-space wave, q_z = omega / c.
    FreeSpace,
    /// Tabulated (omega, q_z) pairs, linear interpolation, sorted by omega.
    Tabulated { table: Vec<(f64, f64)> },
    /// Floquet harmonic m of a grating of period `lambda_g`, observed at
    /// polar angle `theta`: q_z = (omega / c) cos(theta) + 2 pi m / lambda_g.
    Floquet { lambda_g: f64, theta: f64, m: i32 },
}

impl Dispersion {
    pub fn qz(&self, omega: f64) -> Result<f64> {
        match self {
            Dispersion::Synchronous { v } => Ok(omega / v),
            Dispersion::FreeSpace => Ok(omega / SPEED_OF_LIGHT),
            Dispersion::Tabulated { table } => {
                interp_linear(table, omega).ok_or(Error::DispersionUndefined(omega))
            }
            Dispersion::Floquet { lambda_g, theta, m } => Ok(omega * theta.cos() / SPEED_OF_LIGHT
                + 2.0 * std::f64::consts::PI * *m as f64 / lambda_g),
        }
    }
}

/// Mode normalization and coupling geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiationModeSpec {
    /// On-axis longitudinal field amplitude, V/m.
    pub e_qz0: f64,
    /// Mode power normalization, W.
    pub p_q: f64,
    /// Transverse overlap of the electron with the mode profile.
    pub m_perp: Complex64,
    /// Interaction length, m.
    pub length: f64,
    pub dispersion: Dispersion,
}

impl RadiationModeSpec {
    pub fn new(e_qz0: f64, p_q: f64, m_perp: Complex64, length: f64, dispersion: Dispersion) -> Result<Self> {
        ensure_positive("e_qz0", e_qz0)?;
        ensure_positive("p_q", p_q)?;
        ensure_positive("interaction length", length)?;
        if !(m_perp.re.is_finite() && m_perp.im.is_finite()) {
            return Err(Error::OutOfRange {
                name: "m_perp",
                value: m_perp.norm(),
                bound: "must be finite".into(),
            });
        }
        Ok(Self {
            e_qz0,
            p_q,
            m_perp,
            length,
            dispersion,
        })
    }

    /// Detuning omega / v0 - q_z(omega).
    pub fn detuning(&self, v0: f64, omega: f64) -> Result<f64> {
        Ok(omega / v0 - self.dispersion.qz(omega)?)
    }

    /// Axial coupling M~ = M_perp E_qz0 L exp(i theta L / 2) sinc(theta L / 2).
    pub fn matrix_element(&self, v0: f64, omega: f64) -> Result<Complex64> {
        let x = 0.5 * self.detuning(v0, omega)? * self.length;
        Ok(self.m_perp * self.e_qz0 * self.length * sinc(x) * Complex64::from_polar(1.0, x))
    }

    /// Spectral weight W_q = e^2 E_qz0^2 L^2 |M_perp|^2 / (8 pi P_q), J s.
    pub fn w_q(&self) -> f64 {
        let e = ELEMENTARY_CHARGE;
        e * e * self.e_qz0.powi(2) * self.length.powi(2) * self.m_perp.norm_sqr()
            / (8.0 * std::f64::consts::PI * self.p_q)
    }

    /// Interaction impedance K = E_qz0^2 / (2 q_z P_q) at frequency omega.
    pub fn pierce_impedance(&self, omega: f64) -> Result<f64> {
        let qz = self.dispersion.qz(omega)?;
        if qz <= 0.0 {
            return Err(Error::Precondition(format!(
                "interaction impedance needs q_z > 0, got {qz:e}"
            )));
        }
        Ok(self.e_qz0.powi(2) / (2.0 * qz * self.p_q))
    }
}

/// Coherent input wave E0 cos(omega0 t - phi0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputWave {
    /// Field amplitude along the mode, V/m.
    pub e0: f64,
    pub omega0: f64,
    pub phi0: f64,
}

impl InputWave {
    pub fn new(e0: f64, omega0: f64, phi0: f64) -> Result<Self> {
        ensure_positive("e0", e0)?;
        ensure_positive("omega0", omega0)?;
        ensure_finite("phi0", phi0)?;
        Ok(Self { e0, omega0, phi0 })
    }

    /// Same wave with the phase shifted by pi.
    pub fn flipped(&self) -> Self {
        Self {
            phi0: self.phi0 + std::f64::consts::PI,
            ..*self
        }
    }
}

/// Spontaneous spectral energy dW/domega (J s) with well separated harmonic
/// lines: W_q sinc^2 sum_l |B_l|^2 exp(-sigma_t^2 (omega - l omega_b)^2).
pub fn spontaneous_spectrum(mode: &RadiationModeSpec, v0: f64, bunching: &BunchingSpectrum, omega: f64) -> Result<f64> {
    let s = sinc(0.5 * mode.detuning(v0, omega)? * mode.length);
    let st2 = bunching.sigma_t * bunching.sigma_t;
    let lines: f64 = bunching
        .coefficients
        .iter()
        .map(|(&l, b)| {
            let d = omega - l as f64 * bunching.omega_b;
            b.norm_sqr() * (-st2 * d * d).exp()
        })
        .sum();
    Ok(mode.w_q() * s * s * lines)
}

/// Spontaneous spectrum with the full |B(omega)|^2, keeping the interference
/// between overlapping harmonic lines.
pub fn spontaneous_spectrum_coherent(
    mode: &RadiationModeSpec,
    v0: f64,
    bunching: &BunchingSpectrum,
    omega: f64,
) -> Result<f64> {
    let s = sinc(0.5 * mode.detuning(v0, omega)? * mode.length);
    Ok(mode.w_q() * s * s * bunching.at(omega).norm_sqr())
}

/// Stimulated energy transfer to the wave, J. Positive means the electron
/// loses energy to the field.
pub fn stimulated_energy(mode: &RadiationModeSpec, v0: f64, bunching: &BunchingSpectrum, wave: &InputWave) -> Result<f64> {
    let m = mode.matrix_element(v0, wave.omega0)? / mode.e_qz0;
    let b = bunching.at(wave.omega0);
    Ok(ELEMENTARY_CHARGE * wave.e0 * (m * b * Complex64::from_polar(1.0, -wave.phi0)).re)
}

/// Stimulated energy written harmonic by harmonic, each term a cosine of the
/// total phase. Equal to [`stimulated_energy`]; kept as an independent form.
pub fn stimulated_energy_by_harmonic(
    mode: &RadiationModeSpec,
    v0: f64,
    bunching: &BunchingSpectrum,
    wave: &InputWave,
) -> Result<Vec<(i32, f64)>> {
    let half = 0.5 * mode.detuning(v0, wave.omega0)? * mode.length;
    let amp = ELEMENTARY_CHARGE * wave.e0 * mode.length * mode.m_perp.norm() * sinc(half);
    let st2 = bunching.sigma_t * bunching.sigma_t;
    Ok(bunching
        .coefficients
        .iter()
        .map(|(&l, b)| {
            let d = wave.omega0 - l as f64 * bunching.omega_b;
            let phase = half + d * bunching.t0e + l as f64 * bunching.omega_b * bunching.t0_mod + b.arg()
                - wave.phi0
                + mode.m_perp.arg();
            (l, amp * b.norm() * phase.cos() * (-0.5 * st2 * d * d).exp())
        })
        .collect())
}

/// Fourier amplitude of the input field over a window of length `t_win`:
/// (E0 T / 2) sinc((omega - omega0) T / 2) exp(i phi0) for omega > 0.
pub fn input_field_spectrum(wave: &InputWave, t_win: f64, omega: f64) -> Complex64 {
    if omega <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    0.5 * wave.e0 * t_win * sinc(0.5 * (omega - wave.omega0) * t_win) * Complex64::from_polar(1.0, wave.phi0)
}

/// Mode amplitude C_in(omega) of the input wave; requires the window to
/// cover the transit time L / v0.
pub fn input_mode_amplitude(
    mode: &RadiationModeSpec,
    v0: f64,
    wave: &InputWave,
    t_win: f64,
    omega: f64,
) -> Result<Complex64> {
    let transit = mode.length / v0;
    if t_win <= transit {
        return Err(Error::Precondition(format!(
            "input window {t_win:e} s must exceed the transit time {transit:e} s"
        )));
    }
    Ok(input_field_spectrum(wave, t_win, omega) / mode.e_qz0)
}

/// Mode amplitude added by the electron, e M~ B(omega) / (4 P_q).
pub fn emitted_mode_amplitude(mode: &RadiationModeSpec, v0: f64, bunching: &BunchingSpectrum, omega: f64) -> Result<Complex64> {
    Ok(ELEMENTARY_CHARGE * mode.matrix_element(v0, omega)? * bunching.at(omega) / (4.0 * mode.p_q))
}

/// Spectral energy split into input, spontaneous and stimulated parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub input: f64,
    pub spontaneous: f64,
    pub stimulated: f64,
    pub total: f64,
}

impl SpectralDecomposition {
    /// From the mode amplitudes: total (2 P_q / pi) |C_in + dC|^2 with the
    /// cross term (4 P_q / pi) Re(C_in* dC) as the stimulated part.
    pub fn from_amplitudes(p_q: f64, c_in: Complex64, delta_c: Complex64) -> Self {
        let k = 2.0 * p_q / std::f64::consts::PI;
        Self {
            input: k * c_in.norm_sqr(),
            spontaneous: k * delta_c.norm_sqr(),
            stimulated: 2.0 * k * (c_in.conj() * delta_c).re,
            total: k * (c_in + delta_c).norm_sqr(),
        }
    }
}

/// Emitted mode amplitude from direct quadrature of the current-field
/// overlap in z and t. Slow; used to validate the closed form.
pub fn emitted_mode_amplitude_quadrature(
    mode: &RadiationModeSpec,
    v0: f64,
    sigma_t: f64,
    t0e: f64,
    omega: f64,
    n_z: usize,
    n_t: usize,
) -> Result<Complex64> {
    ensure_positive("sigma_t", sigma_t)?;
    let qz = mode.dispersion.qz(omega)?;
    let hz = mode.length / (n_z - 1) as f64;
    let half_t = 12.0 * sigma_t;
    let ht = 2.0 * half_t / (n_t - 1) as f64;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma_t);
    let simpson = |i: usize, n: usize| -> f64 {
        if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for iz in 0..n_z {
        let z = hz * iz as f64;
        let centre = t0e + z / v0;
        let mut inner = Complex64::new(0.0, 0.0);
        for it in 0..n_t {
            let tau = -half_t + ht * it as f64;
            let f = norm * (-tau * tau / (2.0 * sigma_t * sigma_t)).exp();
            inner += simpson(it, n_t) * f * Complex64::from_polar(1.0, omega * (centre + tau));
        }
        inner *= ht / 3.0;
        acc += simpson(iz, n_z) * inner * Complex64::from_polar(1.0, -qz * z);
    }
    acc *= hz / 3.0;
    Ok(ELEMENTARY_CHARGE * mode.m_perp * mode.e_qz0 * acc / (4.0 * mode.p_q))
}

/// Both sides of the single-electron emission/absorption relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EinsteinCheck {
    /// Square of the peak stimulated energy transfer.
    pub lhs: f64,
    /// 8 pi E0^2 P_q / E_qz0^2 times the spontaneous spectral energy.
    pub rhs: f64,
    pub residual: f64,
    /// Same relation with the mode normalization written through the
    /// interaction impedance.
    pub lhs_pierce: f64,
    pub rhs_pierce: f64,
    pub residual_pierce: f64,
}

/// Check (dW_ST,max)^2 = (8 pi E0^2 P_q / E_qz0^2) dW_SP/domega at omega0.
///
/// The stimulated transfer is evaluated at its maximum over the wave phase.
/// Requires synchronism at omega0.
pub fn einstein_relation_check(
    mode: &RadiationModeSpec,
    v0: f64,
    bunching: &BunchingSpectrum,
    wave: &InputWave,
) -> Result<EinsteinCheck> {
    let theta = mode.detuning(v0, wave.omega0)?;
    if (theta * mode.length).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "relation holds at synchronism only; theta L = {:e}",
            theta * mode.length
        )));
    }
    let e = ELEMENTARY_CHARGE;
    let m = mode.matrix_element(v0, wave.omega0)? / mode.e_qz0;
    let st_max = e * wave.e0 * (m * bunching.at(wave.omega0)).norm();
    let lhs = st_max * st_max;
    let sp = spontaneous_spectrum_coherent(mode, v0, bunching, wave.omega0)?;
    let rhs = 8.0 * std::f64::consts::PI * wave.e0.powi(2) * mode.p_q / mode.e_qz0.powi(2) * sp;

    let k = mode.pierce_impedance(wave.omega0)?;
    let qz = mode.dispersion.qz(wave.omega0)?;
    let lhs_pierce = (e * wave.e0 * mode.length * mode.m_perp.norm()).powi(2)
        * bunching.at(wave.omega0).norm_sqr();
    let w_q_pierce = e * e * mode.length.powi(2) * mode.m_perp.norm_sqr() * qz * k / (4.0 * std::f64::consts::PI);
    let rhs_pierce = 4.0 * std::f64::consts::PI * wave.e0.powi(2) / (qz * k)
        * w_q_pierce
        * bunching.at(wave.omega0).norm_sqr();
    let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
    Ok(EinsteinCheck {
        lhs,
        rhs,
        residual: rel(lhs, rhs),
        lhs_pierce,
        rhs_pierce,
        residual_pierce: rel(lhs_pierce, rhs_pierce),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linspace;
    use proptest::prelude::*;

    const V0: f64 = 0.7 * SPEED_OF_LIGHT;

    fn mode(dispersion: Dispersion) -> RadiationModeSpec {
        RadiationModeSpec::new(1e7, 1e3, Complex64::new(0.8, 0.0), 50e-6, dispersion).unwrap()
    }

    #[test]
    fn dispersion_variants() {
        let w = 2e15;
        assert_eq!(Dispersion::Synchronous { v: V0 }.qz(w).unwrap(), w / V0);
        assert!((Dispersion::FreeSpace.qz(w).unwrap() - w / SPEED_OF_LIGHT).abs() < 1e-6);
        let t = Dispersion::Tabulated {
            table: vec![(1e15, 1e7), (3e15, 3e7)],
        };
        assert!((t.qz(2e15).unwrap() - 2e7).abs() < 1e-6);
        assert!(matches!(t.qz(4e15), Err(Error::DispersionUndefined(_))));
        let f = Dispersion::Floquet {
            lambda_g: 1e-6,
            theta: std::f64::consts::FRAC_PI_2,
            m: 1,
        };
        assert!((f.qz(w).unwrap() - 2.0 * std::f64::consts::PI / 1e-6).abs() < 1e-3);
    }

    #[test]
    fn quantum_spectrum_is_classical_times_gaussian() {
        let m = mode(Dispersion::FreeSpace);
        let st = 0.9e-15;
        let point = BunchingSpectrum::unmodulated(0.0, 0.0, 1.0);
        let packet = BunchingSpectrum::unmodulated(st, 2e-15, 1.0);
        for w in linspace(1e14, 5e15, 100) {
            let a = spontaneous_spectrum(&m, V0, &packet, w).unwrap();
            let b = spontaneous_spectrum(&m, V0, &point, w).unwrap();
            let r = a / b;
            assert!((r / (-(w * st).powi(2)).exp() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let m = mode(Dispersion::FreeSpace);
        let st = 1.5e-15;
        let t0e = 0.4e-15;
        let bs = BunchingSpectrum::unmodulated(st, t0e, 1.0);
        for w in [3e14, 1e15, 1.6e15] {
            let a = emitted_mode_amplitude(&m, V0, &bs, w).unwrap();
            let q = emitted_mode_amplitude_quadrature(&m, V0, st, t0e, w, 4001, 801).unwrap();
            assert!((a - q).norm() < 1e-8 * a.norm(), "{a} vs {q}");
        }
    }

    #[test]
    fn stimulated_forms_agree_and_match_spectral_cross_term() {
        let w0 = 1.2e15;
        let m = mode(Dispersion::Synchronous { v: V0 * 1.01 });
        let st = 0.6e-15;
        let bs = BunchingSpectrum::unmodulated(st, 0.3e-15, 1.0);
        let wave = InputWave::new(2e6, w0, 0.9).unwrap();
        let a = stimulated_energy(&m, V0, &bs, &wave).unwrap();
        let parts = stimulated_energy_by_harmonic(&m, V0, &bs, &wave).unwrap();
        let b: f64 = parts.iter().map(|p| p.1).sum();
        assert!((a - b).abs() < 1e-12 * a.abs());

        // Integrate the cross term over a long window; the sinc kernel
        // narrows to a delta function around omega0.
        let t_win = 4e-11;
        let span = 400.0 * 2.0 * std::f64::consts::PI / t_win;
        let n = 200_001;
        let h = 2.0 * span / (n - 1) as f64;
        let mut total = 0.0;
        for i in 0..n {
            let w = w0 - span + h * i as f64;
            let c_in = input_mode_amplitude(&m, V0, &wave, t_win, w).unwrap();
            let dc = emitted_mode_amplitude(&m, V0, &bs, w).unwrap();
            let d = SpectralDecomposition::from_amplitudes(m.p_q, c_in, dc);
            total += d.stimulated * h;
        }
        assert!((total - a).abs() < 2e-3 * a.abs(), "{total} vs {a}");
    }

    #[test]
    fn input_energy_parseval() {
        let wave = InputWave::new(1e6, 2e15, 0.0).unwrap();
        let t_win = 1e-12;
        let span = 2000.0 * 2.0 * std::f64::consts::PI / t_win;
        let n = 400_001;
        let h = 2.0 * span / (n - 1) as f64;
        let mut e = 0.0;
        for i in 0..n {
            let w = wave.omega0 - span + h * i as f64;
            e += input_field_spectrum(&wave, t_win, w).norm_sqr() * h;
        }
        e /= std::f64::consts::PI;
        let expect = wave.e0 * wave.e0 * t_win / 2.0;
        assert!((e / expect - 1.0).abs() < 1e-3);
        let m = mode(Dispersion::FreeSpace);
        assert!(input_mode_amplitude(&m, V0, &wave, 1e-14, 2e15).is_err());
    }

    #[test]
    fn einstein_relation() {
        let w0 = 1.5e15;
        let m = mode(Dispersion::Synchronous { v: V0 });
        let wave = InputWave::new(3e6, w0, 0.2).unwrap();
        for st in [0.0, 0.5e-15, 2e-15] {
            let bs = BunchingSpectrum::unmodulated(st, 0.0, 1.0);
            let c = einstein_relation_check(&m, V0, &bs, &wave).unwrap();
            assert!(c.residual < 1e-12 && c.residual_pierce < 1e-12);
        }
        let off = mode(Dispersion::FreeSpace);
        let bs = BunchingSpectrum::unmodulated(0.0, 0.0, 1.0);
        assert!(einstein_relation_check(&off, V0, &bs, &wave).is_err());
    }

    proptest! {
        #[test]
        fn phase_flip_reverses_stimulated_energy(phi in -10.0f64..10.0, t0e in -3e-15f64..3e-15, st in 0.0f64..2e-15) {
            let m = mode(Dispersion::FreeSpace);
            let bs = BunchingSpectrum::unmodulated(st, t0e, 1.0);
            let wave = InputWave::new(1e6, 1e15, phi).unwrap();
            let a = stimulated_energy(&m, V0, &bs, &wave).unwrap();
            let b = stimulated_energy(&m, V0, &bs, &wave.flipped()).unwrap();
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-40));
        }
    }
}
