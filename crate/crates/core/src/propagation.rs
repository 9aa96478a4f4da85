//! Propagation of the two weak pulse envelopes in the retarded frame.
//!
//! With ξ = t - z/v_g both pulses are stationary, so each envelope obeys
//! ∂E_j/∂z = iα_j E_j with α_j set by the local partner intensity. The march
//! accumulates the complex exponent Φ_j(ξ) = ∫ α_j dz with a second-order
//! (Heun) step.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::{AtomSpec, PhysicalConstants, Scheme, SchemeConfig};
use crate::dynamics::VelocityClass;
use crate::error::{Error, Result};
use crate::response::{
    approx_forms, group_velocity, polarizability_analytic, polarizability_numeric,
};

/// Largest permitted |α|·dz.
pub const MAX_STEP_PHASE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Envelope {
    Gaussian,
    HyperbolicSecant,
    FlatTop,
}

/// How the pulse strength is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseAmplitude {
    PeakRabi(Complex64),
    PhotonNumber(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub envelope: Envelope,
    /// Full width of the intensity envelope at 1/e of its peak.
    pub duration: f64,
    pub amplitude: PulseAmplitude,
    pub beam_area: f64,
}

impl PulseSpec {
    pub fn new(envelope: Envelope, duration: f64, peak_rabi: Complex64, beam_area: f64) -> Self {
        Self {
            envelope,
            duration,
            amplitude: PulseAmplitude::PeakRabi(peak_rabi),
            beam_area,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Domain(format!(
                "pulse duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.beam_area > 0.0 && self.beam_area.is_finite()) {
            return Err(Error::Domain(format!(
                "beam area must be positive, got {}",
                self.beam_area
            )));
        }
        match self.amplitude {
            PulseAmplitude::PhotonNumber(n) if !(n >= 0.0 && n.is_finite()) => Err(Error::Domain(
                format!("photon number must be non-negative, got {n}"),
            )),
            PulseAmplitude::PeakRabi(o) if !(o.re.is_finite() && o.im.is_finite()) => {
                Err(Error::Domain("peak Rabi frequency must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Peak Rabi frequency, converting a photon number with [`single_photon_rabi`].
    pub fn peak_rabi(&self, atom: &AtomSpec, constants: &PhysicalConstants) -> Result<Complex64> {
        match self.amplitude {
            PulseAmplitude::PeakRabi(o) => Ok(o),
            PulseAmplitude::PhotonNumber(_) => {
                Ok(single_photon_rabi(atom, self, constants)?.into())
            }
        }
    }

    /// Real envelope shape normalized to 1 at ξ = 0.
    pub fn shape(&self, xi: f64) -> f64 {
        let tau = self.duration;
        match self.envelope {
            // |E|² = exp(-4ξ²/τ²) is 1/e at ξ = ±τ/2.
            Envelope::Gaussian => (-2.0 * xi * xi / (tau * tau)).exp(),
            Envelope::HyperbolicSecant => {
                let w = 0.5 * tau / SECH_HALF_WIDTH;
                1.0 / (xi / w).cosh()
            }
            Envelope::FlatTop => {
                if xi.abs() <= 0.5 * tau {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// acosh(√e): sech²(x) = 1/e at this x.
const SECH_HALF_WIDTH: f64 = 1.085_038_501_948_388;

/// Peak Rabi frequency of an n-photon pulse.
///
/// Convention: the pulse energy nħω₀ fills the free-space volume σ·c·τ, so
/// the field amplitude is E = √(2nħω₀/(ε₀cστ)); the dipole moment follows
/// from α₀ = |μ|²ω₀N/(2ε₀cħγ) = σ₀N as |μ|² = 2ε₀cħγσ₀/ω₀; Ω = |μ|E/ħ.
pub fn single_photon_rabi(
    atom: &AtomSpec,
    pulse: &PulseSpec,
    constants: &PhysicalConstants,
) -> Result<f64> {
    pulse.validate()?;
    let n = match pulse.amplitude {
        PulseAmplitude::PhotonNumber(n) => n,
        PulseAmplitude::PeakRabi(_) => {
            return Err(Error::Precondition(
                "single_photon_rabi needs a photon number".into(),
            ));
        }
    };
    let (hbar, eps0, c) = (
        constants.hbar(),
        constants.vacuum_permittivity(),
        constants.light_speed(),
    );
    let field =
        (2.0 * n * hbar * atom.omega0 / (eps0 * c * pulse.beam_area * pulse.duration)).sqrt();
    let dipole = (2.0 * eps0 * c * hbar * atom.gamma * atom.sigma0 / atom.omega0).sqrt();
    Ok(dipole * field / hbar)
}

/// How α is evaluated during the march.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationMode {
    /// Closed form for the scheme, from the local partner intensity.
    AnalyticAlpha,
    /// Numeric steady state at the local probe amplitudes.
    NumericAlpha,
    /// Fixed α for both fields, independent of the envelopes.
    Constant {
        alpha_a: Complex64,
        alpha_b: Complex64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationGrid {
    pub length: f64,
    pub dz: f64,
    /// Total span of the retarded-time window, centred on ξ = 0.
    pub window: f64,
    pub samples: usize,
    /// Number of z slices kept in the result (the input and output are always kept).
    pub snapshots: usize,
}

impl PropagationGrid {
    /// Window of ten pulse durations with 1025 samples (odd, so ξ = 0 is a node).
    pub fn for_pulse(pulse: &PulseSpec, length: f64, dz: f64) -> Self {
        Self {
            length,
            dz,
            window: 10.0 * pulse.duration,
            samples: 1025,
            snapshots: 33,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.samples;
        (0..n)
            .map(|k| self.window * (k as f64 / (n - 1) as f64 - 0.5))
            .collect()
    }

    pub fn step(&self) -> f64 {
        self.window / (self.samples - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Domain(format!(
                "length must be positive, got {}",
                self.length
            )));
        }
        if !(self.dz > 0.0 && self.dz <= self.length) {
            return Err(Error::Domain(format!(
                "dz must lie in (0, length], got {}",
                self.dz
            )));
        }
        if !(self.window > 0.0) || self.samples < 16 {
            return Err(Error::Domain(
                "retarded window needs a positive span and at least 16 samples".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub z: f64,
    pub e_a: Vec<Complex64>,
    pub e_b: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Accumulated exponent Φ_j(ξ) = ∫α_j dz at the exit.
    pub exponent_a: Vec<Complex64>,
    pub exponent_b: Vec<Complex64>,
    /// Phase and absorption at the input peak sample.
    pub phase_a: f64,
    pub phase_b: f64,
    pub absorption_a: f64,
    pub absorption_b: f64,
    pub group_velocity: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl PropagationResult {
    pub fn input(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn output(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("input and output are always recorded")
    }

    /// Σ|E|²dξ of each field for every recorded slice.
    pub fn energies(&self) -> Vec<(f64, f64, f64)> {
        let dt = self.times[1] - self.times[0];
        let e = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>() * dt;
        self.snapshots
            .iter()
            .map(|s| (s.z, e(&s.e_a), e(&s.e_b)))
            .collect()
    }

    /// Lab-frame envelope E_j(z, t) = E_j^ret(z, t - z/v_g) for a recorded slice,
    /// linearly interpolated; zero outside the window.
    pub fn lab_frame(&self, slice: usize, field_b: bool, t: f64) -> Complex64 {
        let s = &self.snapshots[slice];
        let v = if field_b { &s.e_b } else { &s.e_a };
        let xi = t - s.z / self.group_velocity;
        let (t0, dt) = (self.times[0], self.times[1] - self.times[0]);
        let x = (xi - t0) / dt;
        if x < 0.0 || x > (v.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let k = (x.floor() as usize).min(v.len() - 2);
        let f = x - k as f64;
        v[k] * (1.0 - f) + v[k + 1] * f
    }
}

/// Per-unit-intensity closed-form coefficients (κ_a, κ_b) with
/// α_a = κ_a|Ω_b|² and α_b = κ_b|Ω_a|².
fn analytic_coefficients(config: &SchemeConfig) -> Result<(Complex64, Complex64)> {
    let unit = config.clone().with_probes(1.0.into(), 1.0.into());
    let r = match config.scheme() {
        Scheme::CrossPhase => polarizability_analytic(&unit)?,
        Scheme::CrossAbsorption => approx_forms(&unit)?
            .cross_absorption
            .ok_or_else(|| Error::Config("cross-absorption form unavailable".into()))?,
    };
    Ok((r.alpha_a.value(), r.alpha_b.value()))
}

struct Evaluator<'a> {
    config: &'a SchemeConfig,
    mode: PropagationMode,
    kappa: (Complex64, Complex64),
}

impl Evaluator<'_> {
    fn alpha(&self, ea: Complex64, eb: Complex64) -> Result<(Complex64, Complex64)> {
        match self.mode {
            PropagationMode::Constant { alpha_a, alpha_b } => Ok((alpha_a, alpha_b)),
            PropagationMode::AnalyticAlpha => {
                Ok((self.kappa.0 * eb.norm_sqr(), self.kappa.1 * ea.norm_sqr()))
            }
            PropagationMode::NumericAlpha => {
                if ea.norm() == 0.0 && eb.norm() == 0.0 {
                    return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
                }
                let c = self.config.clone().with_probes(ea, eb);
                let r = polarizability_numeric(&c, &VelocityClass::at_rest())?;
                Ok((r.alpha_a.value(), r.alpha_b.value()))
            }
        }
    }

    fn alphas(&self, a: &[Complex64], b: &[Complex64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let mut out_a = Vec::with_capacity(a.len());
        let mut out_b = Vec::with_capacity(a.len());
        for (&x, &y) in a.iter().zip(b) {
            let (p, q) = self.alpha(x, y)?;
            out_a.push(p);
            out_b.push(q);
        }
        Ok((out_a, out_b))
    }
}

fn peak_index(v: &[Complex64]) -> usize {
    // Centre of the set of maximal samples, so flat tops report their middle.
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let hits: Vec<usize> = (0..v.len())
        .filter(|&k| v[k].norm() >= max * (1.0 - 1e-12))
        .collect();
    hits[hits.len() / 2]
}

/// Marches both envelopes through `grid.length`.
pub fn propagate(
    config: &SchemeConfig,
    pulse_a: &PulseSpec,
    pulse_b: &PulseSpec,
    grid: &PropagationGrid,
    mode: PropagationMode,
) -> Result<PropagationResult> {
    grid.validate()?;
    pulse_a.validate()?;
    pulse_b.validate()?;
    let config = if config.stark_incorporated() {
        config.clone()
    } else {
        config.folded()?
    };
    let (atom, constants) = (config.atom(), config.constants());
    let (oa, ob) = (
        pulse_a.peak_rabi(atom, constants)?,
        pulse_b.peak_rabi(atom, constants)?,
    );
    let times = grid.times();
    let e0_a: Vec<Complex64> = times.iter().map(|&t| oa * pulse_a.shape(t)).collect();
    let e0_b: Vec<Complex64> = times.iter().map(|&t| ob * pulse_b.shape(t)).collect();

    let mut warnings = Vec::new();
    for (name, v, o) in [("a", &e0_a, oa), ("b", &e0_b, ob)] {
        let edge = v[0].norm().max(v[v.len() - 1].norm());
        if o.norm() > 0.0 && edge > 1e-3 * o.norm() {
            return Err(Error::Resolution(format!(
                "pulse {name} does not fit the retarded window: edge amplitude is {:.2e} of the peak",
                edge / o.norm()
            )));
        }
    }
    let weak = 0.1 * atom.gamma.min(config.rabi_drive().norm());
    if oa.norm().max(ob.norm()) > weak {
        warnings.push(format!(
            "peak probe Rabi frequency {:.3e} exceeds the weak-field bound {weak:.3e}",
            oa.norm().max(ob.norm())
        ));
    }

    let kappa = match mode {
        PropagationMode::AnalyticAlpha => analytic_coefficients(&config)?,
        _ => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
    };
    let eval = Evaluator {
        config: &config,
        mode,
        kappa,
    };

    let v_g = match mode {
        PropagationMode::Constant { .. } => {
            config.rabi_drive().norm_sqr() / (atom.alpha0() * atom.gamma)
        }
        _ => {
            // Weak test probes: v_g is set by the drive alone in this regime.
            let weak = Complex64::new(1e-3 * config.rabi_drive().norm(), 0.0);
            let drive_only = config.clone().with_probes(weak, weak);
            let gv = group_velocity(&drive_only, None)?;
            0.5 * (gv.v_g_a + gv.v_g_b)
        }
    };

    let steps = (grid.length / grid.dz).round().max(1.0) as usize;
    let dz = grid.length / steps as f64;
    let stride = (steps / grid.snapshots.max(1)).max(1);
    let n = times.len();
    let mut phi_a = vec![Complex64::new(0.0, 0.0); n];
    let mut phi_b = vec![Complex64::new(0.0, 0.0); n];
    let mut ea = e0_a.clone();
    let mut eb = e0_b.clone();
    let mut snapshots = vec![Snapshot {
        z: 0.0,
        e_a: e0_a.clone(),
        e_b: e0_b.clone(),
    }];
    let i = Complex64::i();

    for step in 1..=steps {
        let (a1, b1) = eval.alphas(&ea, &eb)?;
        if step == 1 {
            // Only samples carrying field matter; an absent field's α multiplies zero.
            let lit = |alpha: &[Complex64], e: &[Complex64]| {
                alpha
                    .iter()
                    .zip(e)
                    .filter(|(_, x)| x.norm() > 0.0)
                    .map(|(a, _)| a.norm())
                    .fold(0.0, f64::max)
            };
            let worst = lit(&a1, &ea).max(lit(&b1, &eb));
            if worst * dz > MAX_STEP_PHASE {
                return Err(Error::Resolution(format!(
                    "|α|·dz = {:.3e} exceeds {MAX_STEP_PHASE}; reduce dz below {:.3e} m",
                    worst * dz,
                    MAX_STEP_PHASE / worst
                )));
            }
        }
        let pa: Vec<Complex64> = (0..n)
            .map(|k| e0_a[k] * (i * (phi_a[k] + a1[k] * dz)).exp())
            .collect();
        let pb: Vec<Complex64> = (0..n)
            .map(|k| e0_b[k] * (i * (phi_b[k] + b1[k] * dz)).exp())
            .collect();
        let (a2, b2) = eval.alphas(&pa, &pb)?;
        for k in 0..n {
            phi_a[k] += (a1[k] + a2[k]) * (0.5 * dz);
            phi_b[k] += (b1[k] + b2[k]) * (0.5 * dz);
            ea[k] = e0_a[k] * (i * phi_a[k]).exp();
            eb[k] = e0_b[k] * (i * phi_b[k]).exp();
        }
        if step % stride == 0 || step == steps {
            snapshots.push(Snapshot {
                z: step as f64 * dz,
                e_a: ea.clone(),
                e_b: eb.clone(),
            });
        }
    }

    let (ka, kb) = (peak_index(&e0_a), peak_index(&e0_b));
    let p = |phi: Complex64| (1.0 - (-2.0 * phi.im).exp()).clamp(0.0, 1.0);
    Ok(PropagationResult {
        phase_a: phi_a[ka].re,
        phase_b: phi_b[kb].re,
        absorption_a: p(phi_a[ka]),
        absorption_b: p(phi_b[kb]),
        times,
        snapshots,
        exponent_a: phi_a,
        exponent_b: phi_b,
        group_velocity: v_g,
        steps,
        warnings,
    })
}

/// Change in the exit peak phases when dz is halved.
pub fn dz_convergence(
    config: &SchemeConfig,
    pulse_a: &PulseSpec,
    pulse_b: &PulseSpec,
    grid: &PropagationGrid,
    mode: PropagationMode,
) -> Result<f64> {
    let coarse = propagate(config, pulse_a, pulse_b, grid, mode)?;
    let fine = propagate(
        config,
        pulse_a,
        pulse_b,
        &PropagationGrid {
            dz: 0.5 * grid.dz,
            ..*grid
        },
        mode,
    )?;
    Ok((coarse.phase_a - fine.phase_a)
        .abs()
        .max((coarse.phase_b - fine.phase_b).abs()))
}

/// Probe Rabi frequency |Ω| that gives Re(α)·L = π in the large-splitting limit,
/// |Ω|² = π|Δ_D||Ω_d|²/(2α₀γL).
pub fn calibrate_for_pi(config: &SchemeConfig, target_length: f64) -> Result<f64> {
    if config.scheme() != Scheme::CrossPhase {
        return Err(Error::Config(
            "π calibration applies to the cross-phase scheme".into(),
        ));
    }
    if !(target_length > 0.0 && target_length.is_finite()) {
        return Err(Error::Domain(format!(
            "target length must be positive, got {target_length}"
        )));
    }
    let a0 = config.atom().alpha0();
    let g = config.atom().gamma;
    let d = config.effective_delta_d().abs();
    Ok(
        (std::f64::consts::PI * d * config.rabi_drive().norm_sqr()
            / (2.0 * a0 * g * target_length))
            .sqrt(),
    )
}

/// N·σ·depth.
pub fn atoms_in_depth(density: f64, beam_area: f64, depth: f64) -> f64 {
    density * beam_area * depth
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    /// Peak-sample intensity transmission of E_a with E_b present.
    pub transmission_with_partner: f64,
    /// The same with E_b removed.
    pub transmission_without_partner: f64,
    /// e-folding intensity depth 1/(2Im α_a) at the peak partner intensity.
    pub depth: f64,
    pub atoms_in_depth: f64,
    pub warnings: Vec<String>,
}

/// Transmission of E_a through the cross-absorption medium with and without E_b.
pub fn switching_report(
    config: &SchemeConfig,
    pulse_a: &PulseSpec,
    pulse_b: &PulseSpec,
    grid: &PropagationGrid,
    mode: PropagationMode,
) -> Result<SwitchReport> {
    if config.scheme() != Scheme::CrossAbsorption {
        return Err(Error::Config(
            "switching report needs the cross-absorption scheme".into(),
        ));
    }
    let config = if config.stark_incorporated() {
        config.clone()
    } else {
        config.folded()?
    };
    let with = propagate(&config, pulse_a, pulse_b, grid, mode)?;
    let absent = PulseSpec {
        amplitude: PulseAmplitude::PeakRabi(0.0.into()),
        ..*pulse_b
    };
    let without = propagate(&config, pulse_a, &absent, grid, mode)?;
    let (atom, constants) = (config.atom(), config.constants());
    let peak = config.clone().with_probes(
        pulse_a.peak_rabi(atom, constants)?,
        pulse_b.peak_rabi(atom, constants)?,
    );
    let im = match mode {
        PropagationMode::NumericAlpha => {
            polarizability_numeric(&peak, &VelocityClass::at_rest())?
                .alpha_a
                .value()
                .im
        }
        PropagationMode::Constant { alpha_a, .. } => alpha_a.im,
        PropagationMode::AnalyticAlpha => {
            analytic_coefficients(&peak)?.0.im * peak.rabi_b().norm_sqr()
        }
    };
    let depth = if im > 0.0 { 0.5 / im } else { f64::INFINITY };
    let mut warnings = with.warnings.clone();
    warnings.extend(approx_forms(&peak)?.warnings);
    Ok(SwitchReport {
        transmission_with_partner: 1.0 - with.absorption_a,
        transmission_without_partner: 1.0 - without.absorption_a,
        depth,
        atoms_in_depth: atoms_in_depth(atom.density, pulse_a.beam_area, depth),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChirpReport {
    /// d(arg E_j)/dξ at the exit, zero where the field vanishes.
    pub frequency_a: Vec<f64>,
    pub frequency_b: Vec<f64>,
    pub max_chirp_a: f64,
    pub max_chirp_b: f64,
    /// RMS spectral widths of the exit envelopes.
    pub spectral_width_a: f64,
    pub spectral_width_b: f64,
    /// Transparency window |Ω_d|²/γ.
    pub window: f64,
    pub exceeds_window: bool,
}

fn instantaneous_frequency(v: &[Complex64], dt: f64) -> Vec<f64> {
    let peak = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let n = v.len();
    (0..n)
        .map(|k| {
            if k == 0 || k + 1 == n || peak == 0.0 || v[k].norm() < 1e-6 * peak {
                return 0.0;
            }
            // Phase difference across neighbours, immune to branch cuts.
            (v[k + 1] * v[k - 1].conj()).arg() / (2.0 * dt)
        })
        .collect()
}

/// RMS width of |Ẽ(ω)|² from time-domain moments (Parseval).
fn spectral_width(v: &[Complex64], dt: f64) -> f64 {
    let n = v.len();
    let mut norm = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for k in 1..n - 1 {
        let d = (v[k + 1] - v[k - 1]) / (2.0 * dt);
        norm += v[k].norm_sqr();
        first += (v[k].conj() * d).im;
        second += d.norm_sqr();
    }
    if norm == 0.0 {
        return 0.0;
    }
    let mean = first / norm;
    (second / norm - mean * mean).max(0.0).sqrt()
}

pub fn chirp_diagnostics(result: &PropagationResult, config: &SchemeConfig) -> Result<ChirpReport> {
    if result.times.len() < 3 {
        return Err(Error::Precondition(
            "chirp diagnostics need at least three samples".into(),
        ));
    }
    let dt = result.times[1] - result.times[0];
    let out = result.output();
    let fa = instantaneous_frequency(&out.e_a, dt);
    let fb = instantaneous_frequency(&out.e_b, dt);
    let max = |f: &[f64]| f.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let (wa, wb) = (spectral_width(&out.e_a, dt), spectral_width(&out.e_b, dt));
    let window = config.transparency_window();
    Ok(ChirpReport {
        max_chirp_a: max(&fa),
        max_chirp_b: max(&fb),
        frequency_a: fa,
        frequency_b: fb,
        spectral_width_a: wa,
        spectral_width_b: wb,
        window,
        exceeds_window: wa.max(wb) > window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::presets::rb87_d1;

    fn setup(omega: f64, envelope: Envelope) -> (SchemeConfig, PulseSpec) {
        let p = rb87_d1();
        let c = p.cross_phase().folded().unwrap();
        (
            c,
            PulseSpec::new(envelope, p.pulse_duration, omega.into(), p.beam_area),
        )
    }

    #[test]
    fn envelope_widths_are_one_over_e() {
        for env in [Envelope::Gaussian, Envelope::HyperbolicSecant] {
            let p = PulseSpec::new(env, 2.0, 1.0.into(), 1.0);
            assert!(
                (p.shape(1.0).powi(2) - (-1.0f64).exp()).abs() < 1e-14,
                "{env:?}"
            );
            assert_eq!(p.shape(0.0), 1.0);
        }
    }

    #[test]
    fn photon_number_scaling() {
        let p = rb87_d1();
        let pulse = |n| PulseSpec {
            envelope: Envelope::Gaussian,
            duration: p.pulse_duration,
            amplitude: PulseAmplitude::PhotonNumber(n),
            beam_area: p.beam_area,
        };
        let c = PhysicalConstants::CODATA;
        assert_eq!(single_photon_rabi(&p.atom, &pulse(0.0), &c).unwrap(), 0.0);
        let one = single_photon_rabi(&p.atom, &pulse(1.0), &c).unwrap();
        let four = single_photon_rabi(&p.atom, &pulse(4.0), &c).unwrap();
        assert!((four / one - 2.0).abs() < 1e-14);
        assert!((one - 4.64e6).abs() / 4.64e6 < 0.01, "{one}");
    }

    #[test]
    fn calibration_reproduces_pi_through_large_splitting_form() {
        let (c, _) = setup(0.0, Envelope::Gaussian);
        let l = 0.038;
        let o = calibrate_for_pi(&c, l).unwrap();
        let r = approx_forms(&c.clone().with_probes(o.into(), o.into()))
            .unwrap()
            .large_splitting
            .unwrap();
        assert!((r.alpha_a.value().re * l - std::f64::consts::PI).abs() < 1e-9);
        let o2 = calibrate_for_pi(&c, 2.0 * l).unwrap();
        assert!((o / o2 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lone_field_is_unchanged() {
        let (c, p) = setup(5e4, Envelope::Gaussian);
        let none = PulseSpec {
            amplitude: PulseAmplitude::PeakRabi(0.0.into()),
            ..p
        };
        let grid = PropagationGrid::for_pulse(&p, 0.038, 1e-3);
        let r = propagate(&c, &p, &none, &grid, PropagationMode::AnalyticAlpha).unwrap();
        for (x, y) in r.input().e_a.iter().zip(&r.output().e_a) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn flat_top_constant_alpha_matches_closed_form() {
        let (c, p) = setup(5e4, Envelope::FlatTop);
        let alpha = Complex64::new(80.0, 1.2);
        let grid = PropagationGrid::for_pulse(&p, 0.038, 1e-4);
        let r = propagate(
            &c,
            &p,
            &p,
            &grid,
            PropagationMode::Constant {
                alpha_a: alpha,
                alpha_b: alpha.conj(),
            },
        )
        .unwrap();
        let f = (Complex64::i() * alpha * 0.038).exp();
        for (x, y) in r.input().e_a.iter().zip(&r.output().e_a) {
            assert!((y - x * f).norm() <= 1e-6 * x.norm().max(1e-300) || x.norm() == 0.0);
        }
    }

    #[test]
    fn phase_is_additive_for_constant_alpha() {
        let (c, p) = setup(5e4, Envelope::FlatTop);
        let mode = PropagationMode::Constant {
            alpha_a: Complex64::new(80.0, 0.0),
            alpha_b: Complex64::new(-80.0, 0.0),
        };
        let run = |l| {
            propagate(&c, &p, &p, &PropagationGrid::for_pulse(&p, l, 1e-4), mode)
                .unwrap()
                .phase_a
        };
        assert!((run(0.03) - run(0.01) - run(0.02)).abs() < 1e-9);
    }

    #[test]
    fn real_alpha_conserves_energy() {
        let (c, p) = setup(5e4, Envelope::Gaussian);
        let mode = PropagationMode::Constant {
            alpha_a: Complex64::new(80.0, 0.0),
            alpha_b: Complex64::new(-80.0, 0.0),
        };
        let r = propagate(
            &c,
            &p,
            &p,
            &PropagationGrid::for_pulse(&p, 0.038, 1e-4),
            mode,
        )
        .unwrap();
        let e = r.energies();
        for s in &e {
            assert!((s.1 / e[0].1 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn absorption_is_monotone_and_probes_stay_locked() {
        let (c, p) = setup(5e4, Envelope::Gaussian);
        let r = propagate(
            &c,
            &p,
            &p,
            &PropagationGrid::for_pulse(&p, 0.038, 5e-4),
            PropagationMode::AnalyticAlpha,
        )
        .unwrap();
        let peak = peak_index(&r.input().e_a);
        let mut last = 0.0;
        for s in &r.snapshots {
            let t = s.e_a[peak].norm_sqr() / r.input().e_a[peak].norm_sqr();
            assert!(1.0 - t >= last - 1e-15);
            last = 1.0 - t;
        }
        assert!((0.0..=1.0).contains(&r.absorption_a));
        assert!(peak_index(&r.output().e_a).abs_diff(peak_index(&r.output().e_b)) <= 1);
    }

    #[test]
    fn probe_swap_exchanges_outputs() {
        let (c, p) = setup(5e4, Envelope::Gaussian);
        let q = PulseSpec {
            amplitude: PulseAmplitude::PeakRabi(3e4.into()),
            ..p
        };
        let grid = PropagationGrid::for_pulse(&p, 0.038, 5e-4);
        let r = propagate(&c, &p, &q, &grid, PropagationMode::AnalyticAlpha).unwrap();
        let s = propagate(
            &c.probe_swapped(),
            &q,
            &p,
            &grid,
            PropagationMode::AnalyticAlpha,
        )
        .unwrap();
        assert_eq!(r.phase_a, s.phase_b);
        assert_eq!(r.absorption_b, s.absorption_a);
    }

    #[test]
    fn halving_dz_converges() {
        let (c, p) = setup(5e4, Envelope::Gaussian);
        let grid = PropagationGrid::for_pulse(&p, 0.038, 5e-4);
        assert!(dz_convergence(&c, &p, &p, &grid, PropagationMode::AnalyticAlpha).unwrap() < 1e-3);
    }

    #[test]
    fn underresolved_grid_is_rejected() {
        let (c, p) = setup(5e4, Envelope::Gaussian);
        let grid = PropagationGrid::for_pulse(&p, 0.038, 0.038);
        assert!(matches!(
            propagate(&c, &p, &p, &grid, PropagationMode::AnalyticAlpha),
            Err(Error::Resolution(_))
        ));
        let narrow = PropagationGrid {
            window: p.duration,
            ..PropagationGrid::for_pulse(&p, 0.038, 1e-3)
        };
        assert!(matches!(
            propagate(&c, &p, &p, &narrow, PropagationMode::AnalyticAlpha),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn chirp_follows_phase_profile_derivative() {
        let (c, p) = setup(5e4, Envelope::Gaussian);
        let grid = PropagationGrid::for_pulse(&p, 0.038, 5e-4);
        let r = propagate(&c, &p, &p, &grid, PropagationMode::AnalyticAlpha).unwrap();
        let ch = chirp_diagnostics(&r, &c).unwrap();
        // The phase profile is Re Φ(ξ); its analytic derivative at the samples
        // is the oracle, using the intensity envelope exp(-4ξ²/τ²).
        let tau = p.duration;
        let k = r.times.len() / 2;
        assert!(ch.frequency_a[k].abs() < 1e-6 * ch.max_chirp_a);
        let xi_star = tau / 8f64.sqrt();
        let arg = ch
            .frequency_a
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| r.times[i].abs())
            .unwrap();
        assert!((arg - xi_star).abs() < 0.1 * tau, "{arg} vs {xi_star}");
        let none = PulseSpec {
            amplitude: PulseAmplitude::PeakRabi(0.0.into()),
            ..p
        };
        let r0 = propagate(&c, &p, &none, &grid, PropagationMode::AnalyticAlpha).unwrap();
        assert_eq!(chirp_diagnostics(&r0, &c).unwrap().max_chirp_a, 0.0);
    }

    #[test]
    fn switch_opens_without_partner() {
        let pr = rb87_d1();
        let c = pr.cross_absorption().folded().unwrap();
        let p = PulseSpec::new(
            Envelope::Gaussian,
            pr.pulse_duration,
            5e4.into(),
            pr.beam_area,
        );
        let grid = PropagationGrid::for_pulse(&p, 1e-4, 2e-6);
        let s = switching_report(&c, &p, &p, &grid, PropagationMode::AnalyticAlpha).unwrap();
        assert!((s.transmission_without_partner - 1.0).abs() < 1e-12);
        assert!(s.transmission_with_partner < 1.0);
        let q = PulseSpec {
            amplitude: PulseAmplitude::PeakRabi(1e5.into()),
            ..p
        };
        let s2 = switching_report(&c, &p, &q, &grid, PropagationMode::AnalyticAlpha).unwrap();
        assert!((s.depth / s2.depth - 4.0).abs() < 1e-9);
        assert!(matches!(
            switching_report(
                &rb87_d1().cross_phase(),
                &p,
                &p,
                &grid,
                PropagationMode::AnalyticAlpha
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn atoms_in_depth_arithmetic() {
        let n = atoms_in_depth(1e20, 1e-12, 4.3e-5);
        assert!((n - 4300.0).abs() < 1e-9);
    }
}
