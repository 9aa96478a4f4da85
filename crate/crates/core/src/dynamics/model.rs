//! Right-hand sides of the amplitude equations.
//!
//! Every Rabi term is stored as a [`Coupling`] between an upper and a lower
//! state. A coupling with field Ω, Clebsch-Gordan sign `g` and phase rate θ
//! contributes
//!
//! ```text
//! dA_upper/dt += i g Ω  e^{+iθt} A_lower
//! dA_lower/dt += i g Ω* e^{-iθt} A_upper
//! ```
//!
//! and each state adds `(iΔ_j - γ_j) A_j`. The couplings are anti-Hermitian
//! by construction, so with γ = 0 the norm is conserved exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AmplitudeState, VelocityClass};
use crate::atom::{Geometry, Scheme, SchemeConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    Drive,
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    /// 0-based index of the upper state (3, 4 or 5).
    pub upper: usize,
    /// 0-based index of the lower state (0, 1 or 2).
    pub lower: usize,
    pub field: Field,
    pub sign: f64,
    pub phase_rate: f64,
    /// True for terms only present in the extended model.
    pub off_resonant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Core,
    Extended,
}

/// Knobs of the extended model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedOptions {
    /// Multiplies the phase rates of the off-resonant terms; large values
    /// push them out of resonance and recover the core model.
    pub off_resonant_scale: f64,
    pub drive_partners: bool,
    /// Probe couplings to the far-detuned transitions (collinear cross-phase only).
    pub probe_extras: bool,
}

impl Default for ExtendedOptions {
    fn default() -> Self {
        Self {
            off_resonant_scale: 1.0,
            drive_partners: true,
            probe_extras: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeModel {
    kind: ModelKind,
    scheme: Scheme,
    couplings: Vec<Coupling>,
    detunings: [f64; 6],
    decay: [f64; 6],
    rabi: [Complex64; 3],
}

fn c(upper: usize, lower: usize, field: Field, sign: f64, phase_rate: f64) -> Coupling {
    // Labels are 1-based here to read like the state names.
    Coupling {
        upper: upper - 1,
        lower: lower - 1,
        field,
        sign,
        phase_rate,
        off_resonant: false,
    }
}

impl AmplitudeModel {
    /// The six-coupling model with light shifts folded into the detunings.
    pub fn core(config: &SchemeConfig, vclass: &VelocityClass) -> Result<Self> {
        if !config.stark_incorporated() {
            return Err(Error::Precondition(
                "the core model assumes folded light shifts; call stark_shifts (or SchemeConfig::folded) first".into(),
            ));
        }
        let d = config.effective_delta_d();
        let (couplings, detunings) = Self::core_terms(config, vclass, d);
        Ok(Self::assemble(
            ModelKind::Core,
            config,
            couplings,
            detunings,
        ))
    }

    /// Core terms plus the drive partners at ∓2Δ_D and, in the collinear
    /// cross-phase arrangement, the far-detuned probe couplings. Light shifts
    /// are produced dynamically, so `config` must not have them folded.
    pub fn extended(
        config: &SchemeConfig,
        vclass: &VelocityClass,
        options: &ExtendedOptions,
    ) -> Result<Self> {
        if config.stark_incorporated() {
            return Err(Error::Precondition(
                "the extended model generates light shifts itself; pass an unfolded config".into(),
            ));
        }
        if !(options.off_resonant_scale.is_finite() && options.off_resonant_scale > 0.0) {
            return Err(Error::Domain("off_resonant_scale must be positive".into()));
        }
        let z = config.zeeman();
        let d = z.delta_d;
        let (mut couplings, detunings) = Self::core_terms(config, vclass, d);
        let s = options.off_resonant_scale;
        let mut extra = Vec::new();
        if options.drive_partners {
            extra.push(c(4, 1, Field::Drive, -1.0, 2.0 * d * s));
            extra.push(c(6, 3, Field::Drive, 1.0, -2.0 * d * s));
        }
        if options.probe_extras
            && config.scheme() == Scheme::CrossPhase
            && config.geometry() == Geometry::CollinearDopplerFree
        {
            let sum = z.delta_lower + z.delta_upper;
            let du = z.delta_upper;
            let dba = config.detuning_b() - config.detuning_a();
            extra.push(c(5, 1, Field::A, 1.0, sum * s + dba));
            extra.push(c(6, 2, Field::A, 1.0, 2.0 * du * s + dba));
            extra.push(c(5, 3, Field::B, -1.0, -sum * s - dba));
            extra.push(c(4, 2, Field::B, -1.0, -2.0 * du * s - dba));
        }
        for mut e in extra {
            e.off_resonant = true;
            couplings.push(e);
        }
        Ok(Self::assemble(
            ModelKind::Extended,
            config,
            couplings,
            detunings,
        ))
    }

    fn core_terms(
        config: &SchemeConfig,
        vclass: &VelocityClass,
        d: f64,
    ) -> (Vec<Coupling>, [f64; 6]) {
        let (da, db) = (config.detuning_a(), config.detuning_b());
        let kv = vclass.doppler_shift();
        match config.scheme() {
            Scheme::CrossPhase => (
                vec![
                    c(4, 1, Field::Drive, -1.0, 0.0),
                    c(6, 3, Field::Drive, 1.0, 0.0),
                    c(4, 2, Field::A, -1.0, 0.0),
                    c(6, 2, Field::B, 1.0, 0.0),
                    c(5, 1, Field::B, 1.0, d),
                    c(5, 3, Field::A, -1.0, -d),
                ],
                [da, 0.0, db, da - kv, da + db - kv, db - kv],
            ),
            // All fields lowered by Δ_D: E_a resonant with |3>-|5>, E_b 2Δ_D off |1>-|5>,
            // and both drives Δ_D off their transitions.
            Scheme::CrossAbsorption => (
                vec![
                    c(4, 1, Field::Drive, -1.0, 0.0),
                    c(6, 3, Field::Drive, 1.0, 0.0),
                    c(4, 2, Field::A, -1.0, 0.0),
                    c(6, 2, Field::B, 1.0, 0.0),
                    c(5, 1, Field::B, 1.0, 2.0 * d),
                    c(5, 3, Field::A, -1.0, 0.0),
                ],
                [da, 0.0, db, da - d - kv, da + db - kv, db - d - kv],
            ),
        }
    }

    fn assemble(
        kind: ModelKind,
        config: &SchemeConfig,
        couplings: Vec<Coupling>,
        detunings: [f64; 6],
    ) -> Self {
        let g = config.atom().gamma;
        Self {
            kind,
            scheme: config.scheme(),
            couplings,
            detunings,
            decay: [0.0, 0.0, 0.0, g, g, g],
            rabi: [config.rabi_drive(), config.rabi_a(), config.rabi_b()],
        }
    }

    /// Mutation hook for the validation harness: flips the sign of one coupling.
    pub fn with_flipped_sign(mut self, index: usize) -> Self {
        if let Some(c) = self.couplings.get_mut(index) {
            c.sign = -c.sign;
        }
        self
    }

    /// Overrides the upper-state relaxation rate (for instance γ = 0 runs).
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.decay = [0.0, 0.0, 0.0, gamma, gamma, gamma];
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }
    pub fn detunings(&self) -> &[f64; 6] {
        &self.detunings
    }
    pub fn decay(&self) -> &[f64; 6] {
        &self.decay
    }

    pub fn rabi(&self, field: Field) -> Complex64 {
        match field {
            Field::Drive => self.rabi[0],
            Field::A => self.rabi[1],
            Field::B => self.rabi[2],
        }
    }

    /// Components of the right-hand side, written into `out`.
    pub fn rhs_into(&self, t: f64, a: &[Complex64], out: &mut [Complex64]) {
        for j in 0..6 {
            out[j] = Complex64::new(-self.decay[j], self.detunings[j]) * a[j];
        }
        for cp in &self.couplings {
            let omega = self.rabi(cp.field);
            if omega == Complex64::new(0.0, 0.0) {
                continue;
            }
            let phase = if cp.phase_rate == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, cp.phase_rate * t)
            };
            let w = omega * phase * cp.sign;
            let i = Complex64::i();
            out[cp.upper] += i * w * a[cp.lower];
            out[cp.lower] += i * w.conj() * a[cp.upper];
        }
    }

    pub fn rhs(&self, state: &AmplitudeState) -> AmplitudeState {
        let mut out = [Complex64::new(0.0, 0.0); 6];
        self.rhs_into(state.time, &state.amplitudes, &mut out);
        AmplitudeState::new(out, state.time)
    }

    /// Largest explicit rate in the equations, used to cap the step size.
    pub fn fastest_rate(&self) -> f64 {
        let mut r = 0.0f64;
        for j in 0..6 {
            r = r.max(self.detunings[j].abs()).max(self.decay[j]);
        }
        for cp in &self.couplings {
            let omega = self.rabi(cp.field);
            if omega.norm() > 0.0 {
                r = r.max(cp.phase_rate.abs()).max(omega.norm());
            }
        }
        r
    }
}

impl crate::numeric::ode::ComplexSystem<f64> for AmplitudeModel {
    fn dim(&self) -> usize {
        6
    }

    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        self.rhs_into(t, y, dy);
    }

    fn fastest_rate(&self) -> f64 {
        AmplitudeModel::fastest_rate(self)
    }
}
