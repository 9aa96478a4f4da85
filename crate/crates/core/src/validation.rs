//! The acceptance oracles, runnable one by one or as a suite.
//!
//! Each criterion returns named measurements against pinned tolerances. A
//! criterion passes when all of its measurements pass; an internal error
//! counts as a failure and is reported in the summary.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::presets::rb87_d1;
use crate::atom::{field_for_splitting, thermal_speeds, zeeman_shifts, SchemeConfig};
use crate::dynamics::integrate::{integrate_uniform, phase_rate};
use crate::dynamics::{AmplitudeModel, AmplitudeState, ExtendedOptions, VelocityClass};
use crate::error::Result;
use crate::propagation::{
    atoms_in_depth, calibrate_for_pi, propagate, Envelope, PropagationGrid, PropagationMode,
    PulseAmplitude, PulseSpec,
};
use crate::response::{
    approx_forms, doppler_average, group_velocity, polarizability_analytic, polarizability_numeric,
    polarizability_numeric_with, self_phase_numeric, NumericOptions, ThermalEnsemble,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    /// Target value, or the bound for one-sided checks.
    pub expected: f64,
    pub tolerance: f64,
    pub relative: bool,
    pub passed: bool,
}

impl Measurement {
    /// |value - expected| ≤ tolerance·|expected|.
    pub fn rel(label: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (value - expected).abs() <= tolerance * expected.abs();
        Self {
            label: label.into(),
            value,
            expected,
            tolerance,
            relative: true,
            passed,
        }
    }

    /// |value - expected| ≤ tolerance.
    pub fn abs(label: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (value - expected).abs() <= tolerance;
        Self {
            label: label.into(),
            value,
            expected,
            tolerance,
            relative: false,
            passed,
        }
    }

    /// value ≤ bound.
    pub fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            label: label.into(),
            value,
            expected: bound,
            tolerance: 0.0,
            relative: false,
            passed: value <= bound,
        }
    }

    fn describe(&self) -> String {
        let mark = if self.passed { "ok" } else { "FAIL" };
        if self.tolerance == 0.0 && !self.relative {
            format!(
                "{} = {:.6e} (≤ {:.3e}) {mark}",
                self.label, self.value, self.expected
            )
        } else if self.relative {
            format!(
                "{} = {:.6e} vs {:.6e} ±{}% {mark}",
                self.label,
                self.value,
                self.expected,
                self.tolerance * 100.0
            )
        } else {
            format!(
                "{} = {:.6e} vs {:.6e} ±{:.1e} {mark}",
                self.label, self.value, self.expected, self.tolerance
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    /// Diagnostics that are reported but not asserted.
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionResult {
    /// One line: `criterion 3 PASS group-velocity symmetry (0.42 s)`.
    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!(
            "criterion {:>2} {status} {} ({:.2} s)",
            self.id, self.name, self.seconds
        )
    }

    pub fn details(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .measurements
            .iter()
            .map(Measurement::describe)
            .collect();
        out.extend(self.notes.iter().map(|n| format!("note: {n}")));
        if let Some(e) = &self.error {
            out.push(format!("error: {e}"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub criteria: Vec<CriterionResult>,
    pub mutation_detected: bool,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed) && self.mutation_detected
    }
}

struct Outcome {
    measurements: Vec<Measurement>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            measurements: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, m: Measurement) {
        self.measurements.push(m);
    }
}

type CriterionFn = fn() -> Result<Outcome>;

/// A runnable acceptance criterion.
#[derive(Clone, Copy)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    run: CriterionFn,
}

impl Criterion {
    pub fn run(&self) -> CriterionResult {
        let start = Instant::now();
        let outcome = (self.run)();
        let seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok(o) => CriterionResult {
                id: self.id,
                name: self.name.into(),
                passed: !o.measurements.is_empty() && o.measurements.iter().all(|m| m.passed),
                measurements: o.measurements,
                notes: o.notes,
                error: None,
                seconds,
            },
            Err(e) => CriterionResult {
                id: self.id,
                name: self.name.into(),
                passed: false,
                measurements: Vec::new(),
                notes: Vec::new(),
                error: Some(e.to_string()),
                seconds,
            },
        }
    }
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "numeric polarizability matches the closed form",
        run: oracle_equivalence,
    },
    Criterion {
        id: 2,
        name: "Re/Im ratio identity",
        run: ratio_identity,
    },
    Criterion {
        id: 3,
        name: "group-velocity symmetry",
        run: group_velocity_symmetry,
    },
    Criterion {
        id: 4,
        name: "calibrated π phase over 3.8 cm",
        run: worked_example,
    },
    Criterion {
        id: 5,
        name: "cross-absorption figures",
        run: cross_absorption_figures,
    },
    Criterion {
        id: 6,
        name: "norm conservation without decay",
        run: conservation,
    },
    Criterion {
        id: 7,
        name: "lone-field transparency",
        run: lone_field,
    },
    Criterion {
        id: 8,
        name: "Doppler robustness",
        run: doppler_robustness,
    },
    Criterion {
        id: 9,
        name: "ac Stark shift recovery",
        run: stark_recovery,
    },
    Criterion {
        id: 10,
        name: "self-phase modulation",
        run: self_phase,
    },
    Criterion {
        id: 11,
        name: "closed-form flat-top propagation",
        run: closed_form_propagation,
    },
];

pub fn criterion(id: u32) -> Option<Criterion> {
    CRITERIA.iter().copied().find(|c| c.id == id)
}

/// Runs every criterion sequentially plus the mutation meta-check.
pub fn run_all() -> ValidationReport {
    let criteria = CRITERIA.iter().map(Criterion::run).collect();
    ValidationReport {
        criteria,
        mutation_detected: mutation_detected(),
    }
}

fn preset_config() -> Result<SchemeConfig> {
    rb87_d1().cross_phase().folded()
}

fn oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let c = preset_config()?;
    let n = polarizability_numeric(&c, &VelocityClass::at_rest())?;
    let a = polarizability_analytic(&c)?;
    let mut o = Outcome::new();
    for (f, x, y) in [
        ("a", n.alpha_a.value(), a.alpha_a.value()),
        ("b", n.alpha_b.value(), a.alpha_b.value()),
    ] {
        o.push(Measurement::rel(format!("Re α_{f}"), x.re, y.re, 0.02));
        o.push(Measurement::rel(format!("Im α_{f}"), x.im, y.im, 0.02));
    }
    o.push(Measurement::at_most(
        "runtime s",
        start.elapsed().as_secs_f64(),
        10.0,
    ));
    Ok(o)
}

fn ratio_identity() -> Result<Outcome> {
    let c = preset_config()?;
    let g = c.atom().gamma;
    let d = c.effective_delta_d();
    let a = polarizability_analytic(&c)?;
    let n = polarizability_numeric(&c, &VelocityClass::at_rest())?;
    let ratio = |z: Complex64| z.re / z.im;
    let mut o = Outcome::new();
    o.push(Measurement::rel(
        "analytic Re/Im α_a",
        ratio(a.alpha_a.value()),
        d / g,
        1e-12,
    ));
    o.push(Measurement::rel(
        "analytic Re/Im α_b",
        ratio(a.alpha_b.value()),
        -d / g,
        1e-12,
    ));
    o.push(Measurement::rel(
        "bare Δ_D/γ",
        c.zeeman().delta_d / g,
        70.0,
        1e-12,
    ));
    o.push(Measurement::rel(
        "numeric Re/Im α_a",
        ratio(n.alpha_a.value()),
        d / g,
        0.02,
    ));
    o.push(Measurement::rel(
        "numeric Re/Im α_b",
        ratio(n.alpha_b.value()),
        -d / g,
        0.02,
    ));
    Ok(o)
}

fn group_velocity_symmetry() -> Result<Outcome> {
    let start = Instant::now();
    let gv = group_velocity(&preset_config()?, None)?;
    let mut o = Outcome::new();
    let mean = 0.5 * (gv.v_g_a + gv.v_g_b);
    o.push(Measurement::at_most(
        "|v_g_a - v_g_b|/v_g",
        (gv.v_g_a - gv.v_g_b).abs() / mean,
        1e-3,
    ));
    o.push(Measurement::rel("v_g_a", gv.v_g_a, gv.estimate, 0.05));
    o.push(Measurement::rel("v_g_b", gv.v_g_b, gv.estimate, 0.05));
    o.push(Measurement::at_most(
        "runtime s",
        start.elapsed().as_secs_f64(),
        30.0,
    ));
    o.notes
        .push(format!("estimate |Ω_d|²/(α₀γ) = {:.4e} m/s", gv.estimate));
    Ok(o)
}

fn worked_example() -> Result<Outcome> {
    let p = rb87_d1();
    let c = preset_config()?;
    let length = 0.038;
    let omega = calibrate_for_pi(&c, length)?;
    let pulse = PulseSpec::new(
        Envelope::Gaussian,
        p.pulse_duration,
        omega.into(),
        p.beam_area,
    );
    let grid = PropagationGrid::for_pulse(&pulse, length, 2e-4);
    let r = propagate(&c, &pulse, &pulse, &grid, PropagationMode::AnalyticAlpha)?;
    let target_p = 1.0 - (-2.0 * PI / 70.0).exp();
    let mut o = Outcome::new();
    o.push(Measurement::abs("peak phase φ_a", r.phase_a, PI, 0.01));
    o.push(Measurement::abs("peak phase φ_b", -r.phase_b, PI, 0.01));
    o.push(Measurement::abs(
        "absorption p_a",
        r.absorption_a,
        target_p,
        0.002,
    ));
    o.push(Measurement::abs(
        "absorption p_b",
        r.absorption_b,
        target_p,
        0.002,
    ));
    // Mutual depletion: both intensities fall as 1/(1 + xz/L), so the phase is
    // π ln(1 + x)/x with x = 2 Im(α) L at the input intensity.
    let x = 2.0 * PI * c.atom().gamma / c.effective_delta_d();
    o.notes
        .push(format!("calibrated |Ω_a,b| = {omega:.6e} rad/s"));
    o.notes.push(format!(
        "depletion-limited prediction: φ = {:.6}, p = {:.6}",
        PI * (1.0 + x).ln() / x,
        x / (1.0 + x)
    ));
    Ok(o)
}

fn cross_absorption_figures() -> Result<Outcome> {
    let c = rb87_d1().cross_absorption().folded()?;
    let n = polarizability_numeric(&c, &VelocityClass::at_rest())?;
    let f = approx_forms(&c)?
        .cross_absorption
        .expect("cross-absorption scheme");
    let mut o = Outcome::new();
    o.push(Measurement::rel(
        "Im α_a",
        n.alpha_a.value().im,
        f.alpha_a.value().im,
        0.02,
    ));
    o.push(Measurement::rel(
        "Im α_b",
        n.alpha_b.value().im,
        f.alpha_b.value().im,
        0.02,
    ));
    o.push(Measurement::rel(
        "atoms in depth",
        atoms_in_depth(1e20, 1e-12, 4.3e-5),
        4300.0,
        1e-12,
    ));
    // Depth 1/(2 Im α_a) over one decade of |Ω_b|.
    let base = c.rabi_b().norm();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in 0..=4 {
        let ob = base * 10f64.powf(-1.0 + 0.25 * k as f64);
        let r = polarizability_numeric(
            &c.clone().with_probes(c.rabi_a(), ob.into()),
            &VelocityClass::at_rest(),
        )?;
        xs.push(ob.ln());
        ys.push((0.5 / r.alpha_a.value().im).ln());
    }
    o.push(Measurement::abs(
        "depth exponent",
        slope(&xs, &ys),
        -2.0,
        0.02,
    ));
    let omega = calibrate_for_pi(&preset_config()?, 0.038)?;
    let at_pi = approx_forms(&c.clone().with_probes(omega.into(), omega.into()))?
        .cross_absorption
        .expect("scheme");
    o.notes.push(format!(
        "depth at the π-calibrated |Ω| = {:.4e} m (quoted order 4.3e-5 m; depends on the σ₀ convention)",
        0.5 / at_pi.alpha_a.value().im
    ));
    Ok(o)
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

fn conservation() -> Result<Outcome> {
    let p = rb87_d1();
    let c = preset_config()?;
    let t_end = 100.0 / p.atom.gamma;
    let start = AmplitudeState::new(
        [
            Complex64::new(0.3, 0.1),
            Complex64::new(0.8, 0.0),
            Complex64::new(0.2, -0.2),
            Complex64::new(0.0, 0.3),
            Complex64::new(0.1, 0.0),
            Complex64::new(0.0, 0.2),
        ],
        0.0,
    );
    let start = AmplitudeState::new(start.amplitudes.map(|a| a / start.norm_sqr().sqrt()), 0.0);
    let mut o = Outcome::new();
    let core = AmplitudeModel::core(&c, &VelocityClass::at_rest())?.with_gamma(0.0);
    let bare = c.clone().without_stark();
    let ext = AmplitudeModel::extended(
        &bare,
        &VelocityClass::at_rest(),
        &ExtendedOptions::default(),
    )?
    .with_gamma(0.0);
    for (name, m) in [("core", core), ("extended", ext)] {
        let tr = integrate_uniform(&m, &start, t_end, 400, 1e-12)?;
        let drift = tr
            .states
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        o.push(Measurement::at_most(
            format!("{name} norm drift"),
            drift,
            1e-9,
        ));
    }
    Ok(o)
}

fn lone_field() -> Result<Outcome> {
    let p = rb87_d1();
    let c = preset_config()?.with_probes(p.rabi_probe.into(), 0.0.into());
    let n = polarizability_numeric(&c, &VelocityClass::at_rest())?;
    let a0 = c.atom().alpha0();
    let mut o = Outcome::new();
    o.push(Measurement::at_most(
        "|α_a|/α₀",
        n.alpha_a.value().norm() / a0,
        1e-6,
    ));
    let pa = PulseSpec::new(
        Envelope::Gaussian,
        p.pulse_duration,
        p.rabi_probe.into(),
        p.beam_area,
    );
    let pb = PulseSpec {
        amplitude: PulseAmplitude::PeakRabi(0.0.into()),
        ..pa
    };
    let grid = PropagationGrid {
        samples: 257,
        ..PropagationGrid::for_pulse(&pa, 0.038, 3.8e-3)
    };
    let r = propagate(&c, &pa, &pb, &grid, PropagationMode::NumericAlpha)?;
    let peak = r.input().e_a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let change = r
        .input()
        .e_a
        .iter()
        .zip(&r.output().e_a)
        .map(|(x, y)| (y - x).norm())
        .fold(0.0, f64::max)
        / peak;
    o.push(Measurement::at_most(
        "propagated |ΔE_a|/|E_a|",
        change,
        1e-5,
    ));
    Ok(o)
}

fn doppler_robustness() -> Result<Outcome> {
    let p = rb87_d1();
    let c = preset_config()?;
    // Temperature with k·v̄ = Δ_D/5, v̄ = √(3k_BT/m).
    let vbar = c.zeeman().delta_d.abs() / (5.0 * c.wavenumber());
    let t = vbar * vbar * p.atom.mass / (3.0 * c.constants().boltzmann());
    let (_, check) = thermal_speeds(c.atom(), t, c.constants());
    let rest = polarizability_numeric(&c, &VelocityClass::at_rest())?;
    let avg = doppler_average(&c, &ThermalEnsemble::new(&c, t, 16)?)?;
    let mut o = Outcome::new();
    for (f, x, y) in [
        ("a", avg.result.alpha_a.value(), rest.alpha_a.value()),
        ("b", avg.result.alpha_b.value(), rest.alpha_b.value()),
    ] {
        o.push(Measurement::at_most(
            format!("|⟨α_{f}⟩ - α_{f}(0)|/|α_{f}(0)|"),
            (x - y).norm() / y.norm(),
            0.05,
        ));
    }
    o.push(Measurement::at_most(
        "order-doubling change",
        avg.convergence,
        1e-3,
    ));
    o.notes.push(format!(
        "T = {t:.4} K, k·v̄/Δ_D = {:.4}",
        c.wavenumber() * check / c.zeeman().delta_d
    ));
    Ok(o)
}

/// −d(arg A₁)/dt with the drive alone, starting in |1>.
///
/// The decay γ = √(2|Δ_D||Ω_d|) sits between |Ω_d| and 2|Δ_D|, so the
/// resonant drive only damps |1> while the far partner shifts it.
pub fn stark_rotation_rate(splitting_over_drive: f64) -> Result<(f64, f64)> {
    let p = rb87_d1();
    let constants = crate::atom::PhysicalConstants::CODATA;
    let od = p.rabi_drive;
    let dd = splitting_over_drive * od;
    let b = field_for_splitting(&p.atom, dd, &constants)?;
    let z = zeeman_shifts(&p.atom, b, &constants)?;
    let c = p
        .cross_phase()
        .with_probes(0.0.into(), 0.0.into())
        .with_zeeman(z);
    let gamma = (2.0 * dd.abs() * od).sqrt();
    let m = AmplitudeModel::extended(&c, &VelocityClass::at_rest(), &ExtendedOptions::default())?
        .with_gamma(gamma);
    let t_end = 5.0 * gamma / (od * od);
    let tr = integrate_uniform(&m, &AmplitudeState::basis(0), t_end, 4000, 1e-10)?;
    Ok((-phase_rate(&tr, 0), -od * od / (2.0 * dd)))
}

fn stark_recovery() -> Result<Outcome> {
    let mut o = Outcome::new();
    for ratio in [20.0, 50.0, 250.0] {
        let (rate, want) = stark_rotation_rate(ratio)?;
        o.push(Measurement::rel(
            format!("|1> rotation at Δ_D = {ratio}|Ω_d|"),
            rate,
            want,
            0.05,
        ));
    }
    Ok(o)
}

fn self_phase() -> Result<Outcome> {
    let c = preset_config()?;
    let sp = self_phase_numeric(&c, None)?;
    let f = approx_forms(&c)?;
    let (want_a, want_b) = f.self_phase.expect("collinear geometry");
    let mut o = Outcome::new();
    o.push(Measurement::rel(
        "self-phase Re α_a",
        sp.self_a,
        want_a,
        0.10,
    ));
    o.push(Measurement::rel(
        "self-phase Re α_b",
        sp.self_b,
        want_b,
        0.10,
    ));
    // Cross-phase in the same model: Re α_a with E_b on, minus E_b off.
    let opts = NumericOptions::extended();
    let bare = c.clone().without_stark();
    let vc = VelocityClass::at_rest();
    let both = polarizability_numeric_with(&bare, &vc, &opts)?
        .alpha_a
        .value()
        .re;
    let alone = polarizability_numeric_with(
        &bare.clone().with_probes(c.rabi_a(), 0.0.into()),
        &vc,
        &opts,
    )?
    .alpha_a
    .value()
    .re;
    let cross = both - alone;
    let z = c.zeeman();
    let want = c.rabi_a().norm_sqr() * c.effective_delta_d()
        / (2.0 * c.rabi_b().norm_sqr() * (z.delta_lower + z.delta_upper));
    o.push(Measurement::rel(
        "self/cross ratio",
        sp.self_a / cross,
        want,
        0.10,
    ));
    o.notes.push(format!(
        "extended-model cross-phase Re α_a = {cross:.4e} m⁻¹"
    ));
    Ok(o)
}

fn closed_form_propagation() -> Result<Outcome> {
    let p = rb87_d1();
    let c = preset_config()?;
    let a = polarizability_analytic(&c)?;
    let (alpha_a, alpha_b) = (a.alpha_a.value(), a.alpha_b.value());
    let pulse = PulseSpec::new(
        Envelope::FlatTop,
        p.pulse_duration,
        p.rabi_probe.into(),
        p.beam_area,
    );
    let length = p.length;
    let grid = PropagationGrid::for_pulse(&pulse, length, 2e-4);
    let r = propagate(
        &c,
        &pulse,
        &pulse,
        &grid,
        PropagationMode::Constant { alpha_a, alpha_b },
    )?;
    let i = Complex64::i();
    let mut worst: f64 = 0.0;
    for (input, output, alpha) in [
        (&r.input().e_a, &r.output().e_a, alpha_a),
        (&r.input().e_b, &r.output().e_b, alpha_b),
    ] {
        let f = (i * alpha * length).exp();
        for (x, y) in input.iter().zip(output) {
            if x.norm() > 0.0 {
                worst = worst.max((y - x * f).norm() / (x * f).norm());
            } else {
                worst = worst.max(y.norm());
            }
        }
    }
    let mut o = Outcome::new();
    o.push(Measurement::at_most("max relative deviation", worst, 1e-6));
    Ok(o)
}

/// Max deviation between the probe-swapped evolution and the mapped
/// original, B = (A₃, A₂, A₁, −A₆, −A₅, −A₄), over two relaxation times.
/// `mutation` flips the sign of one core coupling in both models.
pub fn probe_swap_trajectory_error(config: &SchemeConfig, mutation: Option<usize>) -> Result<f64> {
    let vc = VelocityClass::at_rest();
    let mutate = |m: AmplitudeModel| match mutation {
        Some(k) => m.with_flipped_sign(k),
        None => m,
    };
    let original = mutate(AmplitudeModel::core(config, &vc)?);
    let swapped = mutate(AmplitudeModel::core(&config.probe_swapped(), &vc)?);
    let map = |a: &[Complex64; 6]| [a[2], a[1], a[0], -a[5], -a[4], -a[3]];
    let s = 0.5f64.sqrt();
    let x0 = AmplitudeState::new(
        [
            Complex64::new(0.5 * s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.5 * s),
            0.0.into(),
            0.0.into(),
            0.0.into(),
        ],
        0.0,
    );
    let y0 = AmplitudeState::new(map(&x0.amplitudes), 0.0);
    let t_end = 2.0 / config.atom().gamma;
    let a = integrate_uniform(&original, &x0, t_end, 50, 1e-11)?;
    let b = integrate_uniform(&swapped, &y0, t_end, 50, 1e-11)?;
    Ok(a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| {
            map(&x.amplitudes)
                .iter()
                .zip(&y.amplitudes)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max))
}

/// Coupling flipped by the mutation meta-check: E_a on |3>-|5>.
pub const MUTATED_COUPLING: usize = 5;

/// True when the symmetry check passes unmutated and fails with the mutation.
pub fn mutation_detected() -> bool {
    let Ok(c) = rb87_d1()
        .cross_phase()
        .with_probes(Complex64::new(2e5, 0.0), Complex64::new(1e5, 0.0))
        .folded()
    else {
        return false;
    };
    let clean = probe_swap_trajectory_error(&c, None);
    let broken = probe_swap_trajectory_error(&c, Some(MUTATED_COUPLING));
    matches!((clean, broken), (Ok(x), Ok(y)) if x <= 1e-9 && y > 1e-6)
}
