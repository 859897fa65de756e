//! Semiclassical radiation from shaped free-electron quantum wavepackets.
//!
//! The crate covers the Gaussian wavepacket and its quadratic dispersion,
//! PINEM-style energy-comb modulation with its Wigner function and bunching
//! coefficients, single-mode spontaneous and stimulated emission, angle and
//! wavelength resolved Smith-Purcell maps, and the multi-particle pulse
//! (shot noise, superradiance, stimulated superradiance).
//!
//! All quantities are SI.

pub mod bunching;
pub mod constants;
pub mod ensemble;
pub mod error;
pub mod gridfile;
pub mod modulation;
pub mod numerics;
pub mod radiation;
pub mod scenario;
pub mod smith_purcell;
pub mod verify;
pub mod wavepacket;

pub use bunching::{fourier_coefficient, BunchingSpectrum};
pub use num_complex::Complex64;
pub use error::{Error, Result};
pub use modulation::wigner::{wigner_function, WignerGrid, WignerRequest};
pub use modulation::{optimal_drift_time, ModulatedState, ModulationSpec, OptimalDrift};
pub use wavepacket::{GaussianWavepacket, RelativisticElectron};
