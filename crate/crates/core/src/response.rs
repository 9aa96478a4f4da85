//! Complex polarizabilities of the two weak fields.
//!
//! The numeric path forms, for each field f,
//!
//! ```text
//! α_f = (α₀γ/Ω_f) Σ_{couplings of f} g ⟨A_lower* A_upper e^{-iθt}⟩_DC
//! ```
//!
//! from the harmonic-balance steady state. For E_b this is the textbook
//! expression ⟨A₂*A₆ + A₁*A₅e^{-iΔ_Dt}⟩; for E_a the Clebsch-Gordan signs of
//! both its transitions are negative, and carrying them along keeps
//! Im α_a ≥ 0 (a passive medium).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::{thermal_speeds, Geometry, Scheme, SchemeConfig};
use crate::dynamics::{
    steady_state_harmonic, AmplitudeModel, ExtendedOptions, Field, HarmonicSolution, VelocityClass,
};
use crate::error::{Error, Result};
use crate::numeric::diff::{richardson_central, DiffError};
use crate::numeric::quadrature::GaussHermite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Harmonic-balance steady state of the amplitude equations.
    NumericSteadyState,
    /// Fourth-order perturbative closed form at Raman resonance.
    ClosedForm,
    /// The closed form expanded for Δ_D ≫ γ.
    LargeSplitting,
    /// Induced absorption of the cross-absorption scheme.
    CrossAbsorption,
}

/// A field's polarizability, or a marker that the field is not present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "kebab-case")]
pub enum Polarizability {
    Present(Complex64),
    Absent,
}

impl Polarizability {
    /// The value, with an absent field reported as exactly zero.
    pub fn value(&self) -> Complex64 {
        match self {
            Polarizability::Present(v) => *v,
            Polarizability::Absent => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_present(&self) -> bool {
        matches!(self, Polarizability::Present(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseResult {
    pub alpha_a: Polarizability,
    pub alpha_b: Polarizability,
    pub group_velocity_a: Option<f64>,
    pub group_velocity_b: Option<f64>,
    pub method: Method,
    pub doppler_averaged: bool,
    pub temperature: Option<f64>,
    /// Largest oscillating (non-DC) component of each field's coherence, in
    /// the units of α. Not part of α; reported as a diagnostic.
    pub sideband_a: Option<f64>,
    pub sideband_b: Option<f64>,
    pub warnings: Vec<String>,
}

impl ResponseResult {
    fn new(alpha_a: Polarizability, alpha_b: Polarizability, method: Method) -> Self {
        Self {
            alpha_a,
            alpha_b,
            group_velocity_a: None,
            group_velocity_b: None,
            method,
            doppler_averaged: false,
            temperature: None,
            sideband_a: None,
            sideband_b: None,
            warnings: Vec::new(),
        }
    }

    /// Phase φ = Re(α) z accumulated by each field over `length`.
    pub fn phases(&self, length: f64) -> (f64, f64) {
        (
            self.alpha_a.value().re * length,
            self.alpha_b.value().re * length,
        )
    }

    /// Absorption probability p = 1 - exp(-2 Im(α) z) of each field.
    pub fn absorption(&self, length: f64) -> (f64, f64) {
        let p = |a: Complex64| 1.0 - (-2.0 * a.im * length).exp();
        (p(self.alpha_a.value()), p(self.alpha_b.value()))
    }
}

/// Which amplitude model feeds the numeric polarizability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsModel {
    Core,
    Extended(ExtendedOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    pub model: DynamicsModel,
    /// Harmonic truncation; `None` picks 3 for the core model and 12 for the extended one.
    pub order: Option<usize>,
}

impl Default for NumericOptions {
    fn default() -> Self {
        Self {
            model: DynamicsModel::Core,
            order: None,
        }
    }
}

impl NumericOptions {
    pub fn extended() -> Self {
        Self {
            model: DynamicsModel::Extended(ExtendedOptions::default()),
            order: None,
        }
    }

    fn resolved_order(&self) -> usize {
        self.order.unwrap_or(match self.model {
            DynamicsModel::Core => 3,
            DynamicsModel::Extended(_) => 12,
        })
    }

    fn build(&self, config: &SchemeConfig, vclass: &VelocityClass) -> Result<AmplitudeModel> {
        match self.model {
            DynamicsModel::Core => {
                let folded = if config.stark_incorporated() {
                    config.clone()
                } else {
                    config.folded()?
                };
                AmplitudeModel::core(&folded, vclass)
            }
            DynamicsModel::Extended(opts) => {
                AmplitudeModel::extended(&config.clone().without_stark(), vclass, &opts)
            }
        }
    }
}

/// α of `field` from a solved steady state (Absent when Ω_f = 0).
pub fn polarizability_from(
    model: &AmplitudeModel,
    sol: &HarmonicSolution,
    field: Field,
    alpha0: f64,
    gamma: f64,
) -> Polarizability {
    let omega = model.rabi(field);
    if omega.norm() == 0.0 {
        return Polarizability::Absent;
    }
    Polarizability::Present(sol.field_coherence(model, field) * (alpha0 * gamma) / omega)
}

fn sideband(
    model: &AmplitudeModel,
    sol: &HarmonicSolution,
    field: Field,
    alpha0: f64,
    gamma: f64,
) -> Option<f64> {
    let omega = model.rabi(field);
    if omega.norm() == 0.0 {
        return None;
    }
    let m = sol.order as i64;
    let worst = (-2 * m..=2 * m)
        .filter(|&k| k != 0)
        .map(|k| {
            let s: Complex64 = model
                .couplings()
                .iter()
                .filter(|c| c.field == field)
                .map(|c| {
                    sol.dc_product(c.lower, c.upper, sol.harmonic_of(c.phase_rate) + k) * c.sign
                })
                .sum();
            s.norm()
        })
        .fold(0.0, f64::max);
    Some(worst * alpha0 * gamma / omega.norm())
}

/// Numeric steady-state polarizabilities with the core model and M = 3.
pub fn polarizability_numeric(
    config: &SchemeConfig,
    vclass: &VelocityClass,
) -> Result<ResponseResult> {
    polarizability_numeric_with(config, vclass, &NumericOptions::default())
}

pub fn polarizability_numeric_with(
    config: &SchemeConfig,
    vclass: &VelocityClass,
    options: &NumericOptions,
) -> Result<ResponseResult> {
    let model = options.build(config, vclass)?;
    let sol = steady_state_harmonic(&model, options.resolved_order())?;
    let a0 = config.atom().alpha0();
    let g = config.atom().gamma;
    let mut r = ResponseResult::new(
        polarizability_from(&model, &sol, Field::A, a0, g),
        polarizability_from(&model, &sol, Field::B, a0, g),
        Method::NumericSteadyState,
    );
    r.sideband_a = sideband(&model, &sol, Field::A, a0, g);
    r.sideband_b = sideband(&model, &sol, Field::B, a0, g);
    Ok(r)
}

fn absent_if_zero(omega: Complex64, value: Complex64) -> Polarizability {
    if omega.norm() == 0.0 {
        Polarizability::Absent
    } else {
        Polarizability::Present(value)
    }
}

fn splitting(config: &SchemeConfig) -> f64 {
    config.effective_delta_d()
}

/// Perturbative closed form at Raman resonance,
/// `α_{a,b} = 2iα₀γ|Ω_{b,a}|² / ((γ ± iΔ_D)|Ω_d|²)`.
pub fn polarizability_analytic(config: &SchemeConfig) -> Result<ResponseResult> {
    if config.scheme() != Scheme::CrossPhase {
        return Err(Error::Config(
            "the closed form applies to the cross-phase scheme".into(),
        ));
    }
    if config.detuning_a() != 0.0 || config.detuning_b() != 0.0 {
        return Err(Error::Precondition(
            "the closed form holds at Raman resonance, δ_a = δ_b = 0".into(),
        ));
    }
    let od2 = config.rabi_drive().norm_sqr();
    if od2 == 0.0 {
        return Err(Error::Singular(
            "Ω_d = 0: no transparency, the closed form diverges".into(),
        ));
    }
    let a0 = config.atom().alpha0();
    let g = config.atom().gamma;
    let d = splitting(config);
    let num = |o: Complex64| Complex64::new(0.0, 2.0 * a0 * g * o.norm_sqr());
    let alpha_a = num(config.rabi_b()) / (Complex64::new(g, d) * od2);
    let alpha_b = num(config.rabi_a()) / (Complex64::new(g, -d) * od2);
    Ok(ResponseResult::new(
        absent_if_zero(config.rabi_a(), alpha_a),
        absent_if_zero(config.rabi_b(), alpha_b),
        Method::ClosedForm,
    ))
}

/// Approximate forms attached to a scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxForms {
    /// Δ_D ≫ γ expansion (cross-phase scheme).
    pub large_splitting: Option<ResponseResult>,
    /// Self-phase Re α of each field from its own far-detuned transition
    /// (collinear cross-phase only).
    pub self_phase: Option<(f64, f64)>,
    /// Induced absorption; only Im α is modelled, the real parts are zero.
    pub cross_absorption: Option<ResponseResult>,
    pub warnings: Vec<String>,
}

pub fn approx_forms(config: &SchemeConfig) -> Result<ApproxForms> {
    let od2 = config.rabi_drive().norm_sqr();
    if od2 == 0.0 {
        return Err(Error::Singular(
            "Ω_d = 0: the approximate forms diverge".into(),
        ));
    }
    let a0 = config.atom().alpha0();
    let g = config.atom().gamma;
    let d = splitting(config);
    let (oa2, ob2) = (config.rabi_a().norm_sqr(), config.rabi_b().norm_sqr());
    let mut out = ApproxForms {
        large_splitting: None,
        self_phase: None,
        cross_absorption: None,
        warnings: Vec::new(),
    };
    match config.scheme() {
        Scheme::CrossPhase => {
            if d == 0.0 {
                return Err(Error::Singular(
                    "Δ_D = 0: the large-splitting expansion diverges".into(),
                ));
            }
            if d.abs() < 10.0 * g {
                out.warnings.push(format!(
                    "Δ_D/γ = {:.3} is not ≫ 1; the large-splitting forms are inaccurate",
                    d / g
                ));
            }
            let re = 2.0 * a0 * g / (d * od2);
            let im = 2.0 * a0 * g * g / (d * d * od2);
            let mut r = ResponseResult::new(
                absent_if_zero(config.rabi_a(), Complex64::new(re * ob2, im * ob2)),
                absent_if_zero(config.rabi_b(), Complex64::new(-re * oa2, im * oa2)),
                Method::LargeSplitting,
            );
            r.warnings = out.warnings.clone();
            out.large_splitting = Some(r);
            if config.geometry() == Geometry::CollinearDopplerFree {
                let z = config.zeeman();
                let sum = z.delta_lower + z.delta_upper;
                if sum != 0.0 {
                    let k = a0 * g / (sum * od2);
                    out.self_phase = Some((k * oa2, -k * ob2));
                }
            }
        }
        Scheme::CrossAbsorption => {
            let worst = oa2.max(ob2) / od2;
            if d == 0.0 || g / d.abs() <= worst {
                out.warnings.push(format!(
                    "γ/|Δ_D| = {:.3e} does not exceed |Ω_a,b|²/|Ω_d|² = {worst:.3e}",
                    g / d.abs()
                ));
            }
            let mut r = ResponseResult::new(
                absent_if_zero(config.rabi_a(), Complex64::new(0.0, a0 * ob2 / od2)),
                absent_if_zero(config.rabi_b(), Complex64::new(0.0, a0 * oa2 / od2)),
                Method::CrossAbsorption,
            );
            r.warnings = out.warnings.clone();
            out.cross_absorption = Some(r);
        }
    }
    Ok(out)
}

/// Intensity-dependent self-phase of each field in the extended model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfPhase {
    /// Re α_f(Ω_f) - Re α_f(Ω_f → 0) with the partner field off.
    pub self_a: f64,
    pub self_b: f64,
    /// The intensity-independent part that was subtracted.
    pub linear_a: f64,
    pub linear_b: f64,
}

/// Relative probe amplitude used for the linear-response limit.
const LINEAR_LIMIT: f64 = 1e-4;

/// Self-phase from the extended model: each field alone, minus its own
/// weak-field limit, so far-detuned linear refraction drops out.
pub fn self_phase_numeric(config: &SchemeConfig, order: Option<usize>) -> Result<SelfPhase> {
    if config.scheme() != Scheme::CrossPhase || config.geometry() != Geometry::CollinearDopplerFree
    {
        return Err(Error::Precondition(
            "self-phase needs the collinear cross-phase arrangement".into(),
        ));
    }
    let opts = NumericOptions {
        order,
        ..NumericOptions::extended()
    };
    let bare = config.clone().without_stark();
    let zero = Complex64::new(0.0, 0.0);
    let alpha = |oa: Complex64, ob: Complex64, field: Field| -> Result<f64> {
        let r = polarizability_numeric_with(
            &bare.clone().with_probes(oa, ob),
            &VelocityClass::at_rest(),
            &opts,
        )?;
        Ok(if field == Field::A {
            r.alpha_a
        } else {
            r.alpha_b
        }
        .value()
        .re)
    };
    let (oa, ob) = (config.rabi_a(), config.rabi_b());
    let mut out = SelfPhase {
        self_a: 0.0,
        self_b: 0.0,
        linear_a: 0.0,
        linear_b: 0.0,
    };
    if oa.norm() > 0.0 {
        out.linear_a = alpha(oa * LINEAR_LIMIT, zero, Field::A)?;
        out.self_a = alpha(oa, zero, Field::A)? - out.linear_a;
    }
    if ob.norm() > 0.0 {
        out.linear_b = alpha(zero, ob * LINEAR_LIMIT, Field::B)?;
        out.self_b = alpha(zero, ob, Field::B)? - out.linear_b;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    pub temperature: f64,
    /// Maxwellian width u = √(2k_BT/m).
    pub width_u: f64,
    pub velocities: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ThermalEnsemble {
    /// Gauss-Hermite nodes for the distribution exp(-v²/u²)/(u√π).
    pub fn new(config: &SchemeConfig, temperature: f64, order: usize) -> Result<Self> {
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::Domain(format!(
                "temperature must be finite and non-negative, got {temperature}"
            )));
        }
        let (u, _) = thermal_speeds(config.atom(), temperature, config.constants());
        let q = GaussHermite::<f64>::new(order)?;
        Ok(Self {
            temperature,
            width_u: u,
            velocities: q.nodes.iter().map(|x| x * u).collect(),
            weights: q.weights,
        })
    }

    pub fn order(&self) -> usize {
        self.velocities.len()
    }

    /// The same ensemble with the velocity nodes listed in reverse (v → -v).
    pub fn mirrored(&self) -> Self {
        let mut m = self.clone();
        m.velocities = self.velocities.iter().rev().map(|v| -v).collect();
        m.weights.reverse();
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DopplerAverage {
    pub result: ResponseResult,
    /// Relative change of α when the quadrature order is doubled.
    pub convergence: f64,
}

fn average_over(
    config: &SchemeConfig,
    ens: &ThermalEnsemble,
    options: &NumericOptions,
) -> Result<(Polarizability, Polarizability)> {
    let mut sum_a = Complex64::new(0.0, 0.0);
    let mut sum_b = Complex64::new(0.0, 0.0);
    let mut present = (true, true);
    for (&v, &w) in ens.velocities.iter().zip(&ens.weights) {
        let r = polarizability_numeric_with(config, &VelocityClass::new(config, v), options)?;
        present = (r.alpha_a.is_present(), r.alpha_b.is_present());
        sum_a += r.alpha_a.value() * w;
        sum_b += r.alpha_b.value() * w;
    }
    let wrap = |p: bool, v| {
        if p {
            Polarizability::Present(v)
        } else {
            Polarizability::Absent
        }
    };
    Ok((wrap(present.0, sum_a), wrap(present.1, sum_b)))
}

fn rel_change(a: Polarizability, b: Polarizability) -> f64 {
    let (x, y) = (a.value(), b.value());
    if y.norm() == 0.0 {
        x.norm()
    } else {
        (x - y).norm() / y.norm()
    }
}

/// Thermal average of the numeric polarizabilities, with a self-convergence
/// check against twice the quadrature order.
pub fn doppler_average(
    config: &SchemeConfig,
    ensemble: &ThermalEnsemble,
) -> Result<DopplerAverage> {
    doppler_average_with(config, ensemble, &NumericOptions::default())
}

pub fn doppler_average_with(
    config: &SchemeConfig,
    ensemble: &ThermalEnsemble,
    options: &NumericOptions,
) -> Result<DopplerAverage> {
    if config.geometry() != Geometry::CollinearDopplerFree {
        return Err(Error::Precondition(
            "Doppler averaging applies to the collinear geometry; the cold gas has v = 0".into(),
        ));
    }
    if ensemble.order() < 8 {
        return Err(Error::Precondition(format!(
            "quadrature order must be at least 8, got {}",
            ensemble.order()
        )));
    }
    let (a, b, convergence) = if ensemble.width_u == 0.0 {
        let r = polarizability_numeric_with(config, &VelocityClass::at_rest(), options)?;
        (r.alpha_a, r.alpha_b, 0.0)
    } else {
        let (a, b) = average_over(config, ensemble, options)?;
        let fine = ThermalEnsemble::new(config, ensemble.temperature, 2 * ensemble.order())?;
        let (a2, b2) = average_over(config, &fine, options)?;
        (a, b, rel_change(a, a2).max(rel_change(b, b2)))
    };
    if convergence > 1e-2 {
        return Err(Error::Convergence(format!(
            "doubling the quadrature order from {} changed α by {:.2e} relative; use a higher order",
            ensemble.order(),
            convergence
        )));
    }
    let mut result = ResponseResult::new(a, b, Method::NumericSteadyState);
    result.doppler_averaged = true;
    result.temperature = Some(ensemble.temperature);
    if convergence > 1e-3 {
        result.warnings.push(format!(
            "quadrature self-convergence {convergence:.2e} exceeds 1e-3"
        ));
    }
    Ok(DopplerAverage {
        result,
        convergence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupVelocity {
    pub v_g_a: f64,
    pub v_g_b: f64,
    /// |Ω_d|²/(α₀γ).
    pub estimate: f64,
    /// ∂Re(α_j)/∂δ_j and their Richardson error estimates.
    pub slope_a: f64,
    pub slope_b: f64,
    pub slope_error_a: f64,
    pub slope_error_b: f64,
}

/// Group velocities `[1/c + ∂Re(α_j)/∂δ_j]⁻¹` by finite differences of the
/// numeric polarizability. `probe_step` defaults to γ/100.
pub fn group_velocity(config: &SchemeConfig, probe_step: Option<f64>) -> Result<GroupVelocity> {
    let g = config.atom().gamma;
    let h = probe_step.unwrap_or(g / 100.0);
    let vc = VelocityClass::at_rest();
    let base = if config.stark_incorporated() {
        config.clone()
    } else {
        config.folded()?
    };
    let slope = |field: Field| -> Result<(f64, f64)> {
        let f = |delta: f64| -> Result<f64> {
            let c = match field {
                Field::A => base.clone().with_detunings(delta, base.detuning_b()),
                _ => base.clone().with_detunings(base.detuning_a(), delta),
            };
            let r = polarizability_numeric(&c, &vc)?;
            let alpha = if field == Field::A {
                r.alpha_a
            } else {
                r.alpha_b
            };
            match alpha {
                Polarizability::Present(v) => Ok(v.re),
                Polarizability::Absent => Err(Error::Precondition(
                    "group velocity of an absent field".into(),
                )),
            }
        };
        let x0 = if field == Field::A {
            base.detuning_a()
        } else {
            base.detuning_b()
        };
        let d = richardson_central(f, x0, h).map_err(|e| match e {
            DiffError::Eval(e) => e,
            other => Error::Differentiation(other.to_string()),
        })?;
        Ok((d.value, d.error_estimate))
    };
    let (sa, ea) = slope(Field::A)?;
    let (sb, eb) = slope(Field::B)?;
    let c = config.constants().light_speed();
    let estimate = config.rabi_drive().norm_sqr() / (config.atom().alpha0() * g);
    Ok(GroupVelocity {
        v_g_a: 1.0 / (1.0 / c + sa),
        v_g_b: 1.0 / (1.0 / c + sb),
        estimate,
        slope_a: sa,
        slope_b: sb,
        slope_error_a: ea,
        slope_error_b: eb,
    })
}

/// Attaches group velocities to a result.
pub fn with_group_velocity(mut result: ResponseResult, gv: &GroupVelocity) -> ResponseResult {
    result.group_velocity_a = Some(gv.v_g_a);
    result.group_velocity_b = Some(gv.v_g_b);
    result
}

/// Probe-swapped view of a result: α_a ↔ α_b.
pub fn swapped(result: &ResponseResult) -> ResponseResult {
    let mut r = result.clone();
    std::mem::swap(&mut r.alpha_a, &mut r.alpha_b);
    std::mem::swap(&mut r.group_velocity_a, &mut r.group_velocity_b);
    std::mem::swap(&mut r.sideband_a, &mut r.sideband_b);
    r
}
