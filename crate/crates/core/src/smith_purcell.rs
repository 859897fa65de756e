//! Smith-Purcell radiation from a grating: Floquet harmonics, angle and
//! wavelength resolved spectral maps, the bunch-length cutoff and revival
//! spots produced by modulated packets.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bunching::BunchingSpectrum;
use crate::constants::{ELEMENTARY_CHARGE, SPEED_OF_LIGHT};
use crate::error::{ensure_positive, Error, Result};
use crate::numerics::sinc;

/// Minimum samples per ridge or line FWHM along the wavelength axis.
pub const SAMPLES_PER_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    /// Grating period, m.
    pub lambda_g: f64,
    /// Number of periods.
    pub n_g: u32,
    /// Floquet orders included: 1 ..= m_max.
    pub m_max: u32,
}

impl GratingSpec {
    pub fn new(lambda_g: f64, n_g: u32, m_max: u32) -> Result<Self> {
        ensure_positive("lambda_g", lambda_g)?;
        if n_g == 0 || m_max == 0 {
            return Err(Error::Precondition("grating needs n_g >= 1 and m_max >= 1".into()));
        }
        Ok(Self { lambda_g, n_g, m_max })
    }

    pub fn k_g(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.lambda_g
    }

    /// Interaction length N_G lambda_G.
    pub fn length(&self) -> f64 {
        self.n_g as f64 * self.lambda_g
    }

    pub fn orders(&self) -> impl Iterator<Item = u32> {
        1..=self.m_max
    }
}

/// Axial wavenumber and detuning of Floquet order m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetHarmonic {
    pub qz: f64,
    pub theta: f64,
}

pub fn floquet_harmonic(grating: &GratingSpec, v0: f64, polar: f64, omega: f64, m: i32) -> FloquetHarmonic {
    let qz = omega * polar.cos() / SPEED_OF_LIGHT + m as f64 * grating.k_g();
    FloquetHarmonic {
        qz,
        theta: omega / v0 - qz,
    }
}

/// Smith-Purcell wavelength (lambda_G / m)(1/beta - cos Theta).
pub fn spr_wavelength(lambda_g: f64, beta: f64, polar: f64, m: u32) -> f64 {
    lambda_g / m as f64 * (1.0 / beta - polar.cos())
}

/// Polar angle where order m radiates at wavelength `lambda`, if any.
pub fn spr_angle(lambda_g: f64, beta: f64, lambda: f64, m: u32) -> Option<f64> {
    let c = 1.0 / beta - m as f64 * lambda / lambda_g;
    (c.abs() < 1.0).then(|| c.acos())
}

/// Relative spectral FWHM of the grating response, 0.886 / (m N_G).
pub fn sync_linewidth(n_g: u32, m: u32) -> f64 {
    0.886 / (m as f64 * n_g as f64)
}

/// Relative spectral FWHM of bunching line l, 2 sqrt(ln 2) / (l omega_b sigma_t).
pub fn bunching_linewidth(omega_b: f64, sigma_t: f64, l: u32) -> f64 {
    2.0 * 2f64.ln().sqrt() / (l as f64 * omega_b * sigma_t)
}

/// Number of modulation periods 2 sigma_t / T_b spanned by the envelope.
pub fn bunch_periods(omega_b: f64, sigma_t: f64) -> f64 {
    2.0 * sigma_t * omega_b / (2.0 * std::f64::consts::PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinewidthLimit {
    Synchronism,
    Bunching,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Linewidths {
    pub sync: f64,
    pub bunching: f64,
    pub dominant: LinewidthLimit,
}

impl Linewidths {
    pub fn new(n_g: u32, m: u32, omega_b: f64, sigma_t: f64, l: u32) -> Self {
        let sync = sync_linewidth(n_g, m);
        let bunching = bunching_linewidth(omega_b, sigma_t, l);
        Self {
            sync,
            bunching,
            dominant: if sync <= bunching {
                LinewidthLimit::Synchronism
            } else {
                LinewidthLimit::Bunching
            },
        }
    }

    pub fn expected(&self) -> f64 {
        self.sync.min(self.bunching)
    }
}

/// How strongly the exp(-omega^2 sigma_t^2) cutoff suppresses order m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffClass {
    /// omega sigma_t <= 1 over the whole angular range.
    Unaffected,
    /// omega sigma_t crosses 1 inside the angular range.
    PartiallyCut,
    /// Suppressed everywhere, best attenuation still >= 1e-2.
    BarelyObservable,
    /// Best attenuation below 1e-2.
    Extinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCutoff {
    pub m: u32,
    /// omega_m sigma_t at Theta -> pi and Theta -> 0.
    pub omega_sigma_min: f64,
    pub omega_sigma_max: f64,
    /// exp(-(omega sigma_t)^2) at the most favourable angle.
    pub best_attenuation: f64,
    /// exp(-(omega sigma_t)^2) at Theta = pi / 2.
    pub attenuation_normal: f64,
    pub class: CutoffClass,
    /// True when a classification threshold is met with equality.
    pub on_boundary: bool,
}

/// omega_m(Theta) sigma_t = 2 pi m (sigma_z / lambda_G) / (1 - beta cos Theta).
pub fn omega_sigma(beta: f64, sigma_z_over_lambda_g: f64, polar: f64, m: u32) -> f64 {
    2.0 * std::f64::consts::PI * m as f64 * sigma_z_over_lambda_g / (1.0 - beta * polar.cos())
}

/// Cutoff classification of each Floquet order for a packet of RMS length `sigma_z`.
pub fn cutoff_window(grating: &GratingSpec, beta: f64, sigma_z: f64) -> Result<Vec<HarmonicCutoff>> {
    ensure_positive("sigma_z", sigma_z)?;
    let r = sigma_z / grating.lambda_g;
    Ok(grating
        .orders()
        .map(|m| {
            let lo = omega_sigma(beta, r, std::f64::consts::PI, m);
            let hi = omega_sigma(beta, r, 0.0, m);
            let best = (-lo * lo).exp();
            let normal = omega_sigma(beta, r, std::f64::consts::FRAC_PI_2, m);
            let class = if hi <= 1.0 {
                CutoffClass::Unaffected
            } else if lo <= 1.0 {
                CutoffClass::PartiallyCut
            } else if best >= 1e-2 {
                CutoffClass::BarelyObservable
            } else {
                CutoffClass::Extinct
            };
            HarmonicCutoff {
                m,
                omega_sigma_min: lo,
                omega_sigma_max: hi,
                best_attenuation: best,
                attenuation_normal: (-normal * normal).exp(),
                class,
                on_boundary: hi == 1.0 || lo == 1.0 || best == 1e-2,
            }
        })
        .collect())
}

/// Whether the first order lies in the partial-cutoff window
/// (1 - beta) / (2 pi) < sigma_z / lambda_G < (1 + beta) / (2 pi).
pub fn in_first_order_window(beta: f64, sigma_z_over_lambda_g: f64) -> bool {
    let tp = 2.0 * std::f64::consts::PI;
    sigma_z_over_lambda_g > (1.0 - beta) / tp && sigma_z_over_lambda_g < (1.0 + beta) / tp
}

/// Predicted revival spot: line l of the bunching comb meeting order m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevivalSpot {
    pub l: i32,
    pub m: u32,
    pub theta: f64,
    pub lambda: f64,
}

/// Spots where l omega_b equals the order-m Smith-Purcell frequency.
///
/// With `cutoff = Some(x)` lines with l > x are dropped.
pub fn revival_spots(
    grating: &GratingSpec,
    beta: f64,
    omega_b: f64,
    l_max: u32,
    cutoff: Option<f64>,
) -> Vec<RevivalSpot> {
    let mut out = Vec::new();
    for l in 1..=l_max {
        if cutoff.is_some_and(|c| l as f64 > c) {
            continue;
        }
        let lambda = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (l as f64 * omega_b);
        for m in grating.orders() {
            if let Some(theta) = spr_angle(grating.lambda_g, beta, lambda, m) {
                out.push(RevivalSpot {
                    l: l as i32,
                    m,
                    theta,
                    lambda,
                });
            }
        }
    }
    out
}

/// Spectral-map sampling. Polar angles are Theta_j = j pi / theta_divisions
/// for j = 1 .. theta_divisions - 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapAxes {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub n_lambda: usize,
    pub theta_divisions: usize,
}

impl MapAxes {
    pub fn lambda_axis(&self) -> Vec<f64> {
        crate::numerics::linspace(self.lambda_min, self.lambda_max, self.n_lambda)
    }

    pub fn theta_axis(&self) -> Vec<f64> {
        (1..self.theta_divisions)
            .map(|j| j as f64 * std::f64::consts::PI / self.theta_divisions as f64)
            .collect()
    }

    pub fn d_lambda(&self) -> f64 {
        (self.lambda_max - self.lambda_min) / (self.n_lambda - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapChannel {
    /// Point-particle spectrum.
    Classical,
    /// Unmodulated Gaussian packet.
    Quantum,
    /// Modulated packet; requires a bunching spectrum.
    Modulated,
    /// Signed stimulated energy transfer for an input wave.
    Stimulated,
}

impl MapChannel {
    pub fn name(&self) -> &'static str {
        match self {
            MapChannel::Classical => "classical",
            MapChannel::Quantum => "quantum",
            MapChannel::Modulated => "modulated",
            MapChannel::Stimulated => "stimulated",
        }
    }
}

/// Everything the map needs besides the axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SprSource {
    pub grating: GratingSpec,
    pub beta: f64,
    /// Envelope RMS duration at the grating, s.
    pub sigma_t: f64,
    /// |M_m| per order (index m - 1); spontaneous weights are |M_m|^2.
    pub coupling: Vec<f64>,
    pub bunching: Option<BunchingSpectrum>,
}

impl SprSource {
    pub fn new(grating: GratingSpec, beta: f64, sigma_t: f64) -> Self {
        let coupling = vec![1.0; grating.m_max as usize];
        Self {
            grating,
            beta,
            sigma_t,
            coupling,
            bunching: None,
        }
    }

    pub fn with_bunching(mut self, bunching: BunchingSpectrum) -> Self {
        self.sigma_t = bunching.sigma_t;
        self.bunching = Some(bunching);
        self
    }

    fn v0(&self) -> f64 {
        self.beta * SPEED_OF_LIGHT
    }

    fn coupling(&self, m: u32) -> f64 {
        self.coupling.get(m as usize - 1).copied().unwrap_or(1.0)
    }

    fn lines(&self) -> Result<&BunchingSpectrum> {
        self.bunching
            .as_ref()
            .ok_or_else(|| Error::Precondition("modulated channel needs a bunching spectrum".into()))
    }

    /// Grating factor sum_m |M_m|^2 sinc^2 at one cell and the dominant m.
    fn grating_factor(&self, polar: f64, omega: f64) -> (f64, u32) {
        let half_l = 0.5 * self.grating.length();
        let mut total = 0.0;
        let mut best = (0.0, 1);
        for m in self.grating.orders() {
            let h = floquet_harmonic(&self.grating, self.v0(), polar, omega, m as i32);
            let s = sinc(h.theta * half_l);
            let v = self.coupling(m).powi(2) * s * s;
            total += v;
            if v > best.0 {
                best = (v, m);
            }
        }
        (total, best.1)
    }

    /// Bunching factor sum_l |B_l|^2 exp(-sigma_t^2 (omega - l omega_b)^2) and dominant l.
    fn line_factor(&self, omega: f64) -> Result<(f64, i32)> {
        let bs = self.lines()?;
        let st2 = bs.sigma_t * bs.sigma_t;
        let mut total = 0.0;
        let mut best = (0.0, 0);
        for (&l, b) in &bs.coefficients {
            let d = omega - l as f64 * bs.omega_b;
            let v = b.norm_sqr() * (-st2 * d * d).exp();
            total += v;
            if v > best.0 {
                best = (v, l);
            }
        }
        Ok((total, best.1))
    }

    /// Spontaneous map value in units of the single-order spectral weight W_q.
    pub fn spontaneous(&self, channel: MapChannel, polar: f64, omega: f64) -> Result<(f64, i32, u32)> {
        let (g, m) = self.grating_factor(polar, omega);
        match channel {
            MapChannel::Classical => Ok((g, 0, m)),
            MapChannel::Quantum => Ok((g * (-(omega * self.sigma_t).powi(2)).exp(), 0, m)),
            MapChannel::Modulated => {
                let (f, l) = self.line_factor(omega)?;
                Ok((g * f, l, m))
            }
            MapChannel::Stimulated => Err(Error::Precondition(
                "use stimulated_map for the stimulated channel".into(),
            )),
        }
    }

    /// Required wavelength step for this source over the given range.
    pub fn required_d_lambda(&self, channel: MapChannel, lambda_min: f64, lambda_max: f64) -> f64 {
        let mut need = f64::INFINITY;
        let lo_ridge = |m: u32| spr_wavelength(self.grating.lambda_g, self.beta, 0.0, m);
        for m in self.grating.orders() {
            let lam = lambda_min.max(lo_ridge(m));
            if lam <= lambda_max {
                need = need.min(lam * sync_linewidth(self.grating.n_g, m) / SAMPLES_PER_WIDTH);
            }
        }
        if channel == MapChannel::Modulated || channel == MapChannel::Stimulated {
            if let Some(bs) = &self.bunching {
                if bs.sigma_t > 0.0 {
                    let omega_max = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda_min;
                    let w = 2.0 * 2f64.ln().sqrt() / (bs.sigma_t * omega_max);
                    need = need.min(lambda_min * w / SAMPLES_PER_WIDTH);
                }
            }
        }
        need
    }

    fn check_axes(&self, channel: MapChannel, axes: &MapAxes) -> Result<()> {
        if !(axes.lambda_min > 0.0 && axes.lambda_max > axes.lambda_min) || axes.n_lambda < 3 || axes.theta_divisions < 4 {
            return Err(Error::Precondition(
                "map axes need 0 < lambda_min < lambda_max, n_lambda >= 3 and theta_divisions >= 4".into(),
            ));
        }
        let need = self.required_d_lambda(channel, axes.lambda_min, axes.lambda_max);
        if axes.d_lambda() > need {
            let n = ((axes.lambda_max - axes.lambda_min) / need).ceil() as usize + 1;
            return Err(Error::UnderResolved(format!(
                "wavelength step {:.3e} m exceeds {:.3e} m; use n_lambda >= {n}",
                axes.d_lambda(),
                need
            )));
        }
        Ok(())
    }
}

/// Map sampled on (Theta, lambda). `values[i_theta * lambda.len() + i_lambda]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMap {
    pub channel: MapChannel,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    /// Dominant (l, m) per cell.
    pub labels: Vec<(i32, u32)>,
    /// Bunching comb spacing of the source, if modulated.
    pub omega_b: Option<f64>,
}

impl SpectralMap {
    pub fn value(&self, i_theta: usize, i_lambda: usize) -> f64 {
        self.values[i_theta * self.lambda.len() + i_lambda]
    }

    pub fn label(&self, i_theta: usize, i_lambda: usize) -> (i32, u32) {
        self.labels[i_theta * self.lambda.len() + i_lambda]
    }

    pub fn row(&self, i_theta: usize) -> &[f64] {
        let n = self.lambda.len();
        &self.values[i_theta * n..(i_theta + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::MIN, f64::max)
    }

    pub fn theta_index(&self, theta: f64) -> usize {
        nearest(&self.theta, theta)
    }

    pub fn lambda_index(&self, lambda: f64) -> usize {
        nearest(&self.lambda, lambda)
    }
}

fn nearest(axis: &[f64], x: f64) -> usize {
    axis.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|p| p.0)
        .unwrap_or(0)
}

/// Spontaneous map for one channel.
pub fn spectral_map(source: &SprSource, axes: &MapAxes, channel: MapChannel) -> Result<SpectralMap> {
    source.check_axes(channel, axes)?;
    if channel == MapChannel::Modulated {
        source.lines()?;
    }
    let lambda = axes.lambda_axis();
    let theta = axes.theta_axis();
    let rows: Result<Vec<Vec<(f64, (i32, u32))>>> = theta
        .par_iter()
        .map(|&th| {
            lambda
                .iter()
                .map(|&lam| {
                    let w = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lam;
                    source.spontaneous(channel, th, w).map(|(v, l, m)| (v, (l, m)))
                })
                .collect()
        })
        .collect();
    let cells: Vec<(f64, (i32, u32))> = rows?.into_iter().flatten().collect();
    Ok(SpectralMap {
        channel,
        lambda,
        theta,
        values: cells.iter().map(|c| c.0).collect(),
        labels: cells.iter().map(|c| c.1).collect(),
        omega_b: source.bunching.as_ref().map(|b| b.omega_b),
    })
}

/// Signed stimulated energy map, J, for an input wave of amplitude `e0` and
/// phase `phi0` tuned to each cell. Uses the unmodulated envelope when the
/// source has no bunching spectrum.
pub fn stimulated_map(source: &SprSource, axes: &MapAxes, e0: f64, phi0: f64, t0e: f64) -> Result<SpectralMap> {
    source.check_axes(MapChannel::Stimulated, axes)?;
    let bs = source
        .bunching
        .clone()
        .unwrap_or_else(|| BunchingSpectrum::unmodulated(source.sigma_t, t0e, 1.0));
    let lambda = axes.lambda_axis();
    let theta = axes.theta_axis();
    let half_l = 0.5 * source.grating.length();
    let amp = ELEMENTARY_CHARGE * e0 * source.grating.length();
    let cells: Vec<(f64, (i32, u32))> = theta
        .par_iter()
        .map(|&th| {
            lambda
                .iter()
                .map(|&lam| {
                    let w = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lam;
                    let b = bs.at(w) * Complex64::from_polar(1.0, -phi0);
                    let mut total = 0.0;
                    let mut best = (0.0, 1);
                    for m in source.grating.orders() {
                        let h = floquet_harmonic(&source.grating, source.v0(), th, w, m as i32);
                        let x = h.theta * half_l;
                        let v = source.coupling(m) * sinc(x) * (Complex64::from_polar(1.0, x) * b).re;
                        total += v;
                        if v.abs() > best.0 {
                            best = (v.abs(), m);
                        }
                    }
                    (amp * total, (0, best.1))
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(SpectralMap {
        channel: MapChannel::Stimulated,
        lambda,
        theta,
        values: cells.iter().map(|c| c.0).collect(),
        labels: cells.iter().map(|c| c.1).collect(),
        omega_b: source.bunching.as_ref().map(|b| b.omega_b),
    })
}

/// Ridge crest of order m in one row: the cell nearest the local maximum
/// closest to the predicted wavelength.
pub fn ridge_crest(map: &SpectralMap, i_theta: usize, predicted: f64) -> Option<usize> {
    let row = map.row(i_theta);
    let start = map.lambda_index(predicted);
    // Climb from the predicted cell to the nearest local maximum.
    let mut i = start;
    loop {
        let left = if i > 0 { row[i - 1] } else { f64::MIN };
        let right = if i + 1 < row.len() { row[i + 1] } else { f64::MIN };
        if left > row[i] && left >= right {
            i -= 1;
        } else if right > row[i] {
            i += 1;
        } else {
            break;
        }
    }
    (i > 0 && i + 1 < row.len()).then_some(i)
}

/// A revival spot located in a map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedSpot {
    pub l: i32,
    pub m: u32,
    pub i_theta: usize,
    pub i_lambda: usize,
    pub theta: f64,
    pub lambda: f64,
    pub value: f64,
}

/// Interior maxima of the l != 0 bunching lines.
///
/// Cells are grouped by their dominant (l, m). In each row the crest is the
/// interior local maximum in wavelength, with its height refined by a
/// parabola through log values; a spot is a strict interior maximum of the
/// crest height along Theta above `rel_threshold` times the map maximum.
/// Crests closer than `SAMPLES_PER_WIDTH` cells to either wavelength edge are
/// ignored. When the map carries the comb spacing, lines whose centre
/// wavelength lies off the map are skipped: their tails only produce
/// edge-truncated maxima.
pub fn detect_spots(map: &SpectralMap, rel_threshold: f64) -> Vec<DetectedSpot> {
    let nl = map.lambda.len();
    let margin = SAMPLES_PER_WIDTH as usize;
    let floor = rel_threshold * map.max();
    let mut groups: Vec<(i32, u32)> = map.labels.iter().copied().filter(|l| l.0 != 0).collect();
    groups.sort_unstable();
    groups.dedup();
    if let (Some(wb), Some(lo), Some(hi)) = (map.omega_b, map.lambda.get(margin), map.lambda.iter().rev().nth(margin)) {
        groups.retain(|&(l, _)| {
            let centre = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (l as f64 * wb);
            centre >= *lo && centre <= *hi
        });
    }
    let mut spots = Vec::new();
    for (l, m) in groups {
        let crests: Vec<Option<(usize, f64)>> = (0..map.theta.len())
            .map(|j| {
                let row = map.row(j);
                let mut best: Option<(usize, f64)> = None;
                for i in margin.max(1)..nl.saturating_sub(margin.max(1)) {
                    if map.label(j, i) != (l, m) || row[i] <= 0.0 {
                        continue;
                    }
                    if row[i] >= row[i - 1] && row[i] > row[i + 1] && row[i - 1] > 0.0 && row[i + 1] > 0.0 {
                        let (a, b, c) = (row[i - 1].ln(), row[i].ln(), row[i + 1].ln());
                        let den = a - 2.0 * b + c;
                        let h = if den < 0.0 { b - (a - c) * (a - c) / (8.0 * den) } else { b };
                        let v = h.exp();
                        if best.is_none_or(|p| v > p.1) {
                            best = Some((i, v));
                        }
                    }
                }
                best
            })
            .collect();
        let mut top: Option<(usize, usize, f64)> = None;
        for j in 1..crests.len().saturating_sub(1) {
            if let (Some(prev), Some(cur), Some(next)) = (crests[j - 1], crests[j], crests[j + 1]) {
                if cur.1 > prev.1 && cur.1 > next.1 && cur.1 > floor && top.is_none_or(|t| cur.1 > t.2) {
                    top = Some((j, cur.0, cur.1));
                }
            }
        }
        if let Some((j, i, v)) = top {
            spots.push(DetectedSpot {
                l,
                m,
                i_theta: j,
                i_lambda: i,
                theta: map.theta[j],
                lambda: map.lambda[i],
                value: v,
            });
        }
    }
    spots
}

/// Modulated spontaneous spectrum along omega at a fixed polar angle.
pub fn spectrum_cut(source: &SprSource, channel: MapChannel, polar: f64, omegas: &[f64]) -> Result<Vec<f64>> {
    omegas
        .iter()
        .map(|&w| source.spontaneous(channel, polar, w).map(|v| v.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wavelength_and_angle_are_inverse() {
        for m in 1..4 {
            for th in [0.3, 1.0, 2.0, 2.9] {
                let lam = spr_wavelength(1e-6, 0.7, th, m);
                assert!((spr_angle(1e-6, 0.7, lam, m).unwrap() - th).abs() < 1e-12);
            }
        }
        assert!(spr_angle(1e-6, 0.7, 10e-6, 1).is_none());
    }

    #[test]
    fn detuning_vanishes_on_ridge() {
        let g = GratingSpec::new(1e-6, 9, 3).unwrap();
        let v0 = 0.7 * SPEED_OF_LIGHT;
        for m in 1..4 {
            let th = 1.1;
            let w = 2.0 * PI * SPEED_OF_LIGHT / spr_wavelength(1e-6, 0.7, th, m);
            let h = floquet_harmonic(&g, v0, th, w, m as i32);
            assert!((h.theta / h.qz).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_classes_for_short_packet() {
        let g = GratingSpec::new(1e-6, 9, 3).unwrap();
        let c = cutoff_window(&g, 0.7, 0.22e-6).unwrap();
        assert_eq!(c[0].class, CutoffClass::PartiallyCut);
        assert_eq!(c[1].class, CutoffClass::BarelyObservable);
        assert_eq!(c[2].class, CutoffClass::Extinct);
        assert!(in_first_order_window(0.7, 0.22));
        assert!(!in_first_order_window(0.7, 0.3));
        let long = cutoff_window(&g, 0.7, 0.01e-6).unwrap();
        assert_eq!(long[0].class, CutoffClass::Unaffected);
    }

    #[test]
    fn linewidth_formulas() {
        let lw = Linewidths::new(9, 1, 1.0, 1.0, 1);
        assert!((lw.sync - 0.886 / 9.0).abs() < 1e-15);
        // 0.53 / N_b in terms of bunch periods.
        let nb = bunch_periods(1.0, 10.0);
        assert!((bunching_linewidth(1.0, 10.0, 1) * nb - 0.53).abs() < 1e-3);
    }

    #[test]
    fn classical_ridge_lies_on_dispersion_curve() {
        let g = GratingSpec::new(1e-6, 9, 3).unwrap();
        let src = SprSource::new(g, 0.7, 0.0);
        let axes = MapAxes {
            lambda_min: 0.1e-6,
            lambda_max: 2.6e-6,
            n_lambda: 5400,
            theta_divisions: 40,
        };
        let map = spectral_map(&src, &axes, MapChannel::Classical).unwrap();
        let j = map.theta_index(PI / 2.0);
        for m in 1..4 {
            let pred = spr_wavelength(1e-6, 0.7, map.theta[j], m);
            let i = ridge_crest(&map, j, pred).unwrap();
            assert!((map.lambda[i] - pred).abs() <= axes.d_lambda());
        }
    }

    #[test]
    fn under_resolved_map_is_rejected() {
        let g = GratingSpec::new(1e-6, 9, 3).unwrap();
        let src = SprSource::new(g, 0.7, 0.0);
        let axes = MapAxes {
            lambda_min: 0.1e-6,
            lambda_max: 2.6e-6,
            n_lambda: 200,
            theta_divisions: 40,
        };
        let e = spectral_map(&src, &axes, MapChannel::Classical).unwrap_err();
        assert!(matches!(e, Error::UnderResolved(_)));
    }

    #[test]
    fn stimulated_map_flips_with_phase() {
        let g = GratingSpec::new(1e-6, 5, 2).unwrap();
        let src = SprSource::new(g, 0.7, 0.5e-15);
        let axes = MapAxes {
            lambda_min: 0.4e-6,
            lambda_max: 2.0e-6,
            n_lambda: 1200,
            theta_divisions: 12,
        };
        let a = stimulated_map(&src, &axes, 1e6, 0.4, 0.0).unwrap();
        let b = stimulated_map(&src, &axes, 1e6, 0.4 + PI, 0.0).unwrap();
        let scale = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(scale > 0.0);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x + y).abs() <= 1e-12 * scale);
        }
    }
}
