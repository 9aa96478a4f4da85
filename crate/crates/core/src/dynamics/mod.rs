//! Amplitude dynamics of the six-state atom.
//!
//! [`model`] builds the right-hand side (the core model with folded light
//! shifts, or the extended model that keeps the off-resonant couplings),
//! [`integrate`] evolves it in time and [`harmonic`] finds the periodic
//! weak-probe steady state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::{Geometry, SchemeConfig};

pub mod harmonic;
pub mod integrate;
pub mod model;

pub use harmonic::{steady_state_harmonic, HarmonicSolution};
pub use integrate::{integrate, Trajectory};
pub use model::{AmplitudeModel, Coupling, ExtendedOptions, Field, ModelKind};

/// The six amplitudes A₁…A₆ (index 0 is A₁) at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub amplitudes: [Complex64; 6],
    pub time: f64,
}

impl AmplitudeState {
    pub fn new(amplitudes: [Complex64; 6], time: f64) -> Self {
        Self { amplitudes, time }
    }

    /// Everything in |2>, the optically pumped initial state.
    pub fn pumped() -> Self {
        Self::basis(1)
    }

    /// All population in state `index` (0-based).
    pub fn basis(index: usize) -> Self {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 6];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes,
            time: 0.0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// 1-based accessor matching the usual state labels.
    pub fn a(&self, label: usize) -> Complex64 {
        self.amplitudes[label - 1]
    }
}

/// One velocity class along the propagation axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityClass {
    velocity: f64,
    doppler_shift: f64,
}

impl VelocityClass {
    /// The perpendicular cold-gas geometry has no Doppler shift, so `velocity`
    /// is forced to zero there.
    pub fn new(config: &SchemeConfig, velocity: f64) -> Self {
        let velocity = match config.geometry() {
            Geometry::PerpendicularColdGas => 0.0,
            Geometry::CollinearDopplerFree => velocity,
        };
        Self {
            velocity,
            doppler_shift: config.wavenumber() * velocity,
        }
    }

    pub fn at_rest() -> Self {
        Self {
            velocity: 0.0,
            doppler_shift: 0.0,
        }
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn doppler_shift(&self) -> f64 {
        self.doppler_shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::presets::rb87_d1;

    #[test]
    fn perpendicular_geometry_forces_rest() {
        let c = rb87_d1().cross_absorption();
        let v = VelocityClass::new(&c, 30.0);
        assert_eq!(v.velocity(), 0.0);
        assert_eq!(v.doppler_shift(), 0.0);
        let c = rb87_d1().cross_phase();
        let v = VelocityClass::new(&c, 30.0);
        assert_eq!(v.doppler_shift(), c.wavenumber() * 30.0);
    }

    #[test]
    fn pumped_state_is_normalized() {
        let s = AmplitudeState::pumped();
        assert_eq!(s.norm_sqr(), 1.0);
        assert_eq!(s.a(2), Complex64::new(1.0, 0.0));
    }
}
