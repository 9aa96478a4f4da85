//! Scenario files: one `key = value [unit]` assignment per line, `#` comments.
//!
//! Values are stored in SI with angular frequencies in rad/s. Units are
//! converted while parsing; serialization always writes bare SI numbers in
//! shortest round-trip form, so `parse(serialize(s)) == s`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atom::presets::{self, Preset};
use crate::atom::{
    resonant_cross_section, zeeman_shifts, AtomSpec, Geometry, PhysicalConstants, Scheme,
    SchemeConfig,
};
use crate::error::{Error, Result};
use crate::propagation::{Envelope, PropagationGrid, PulseAmplitude, PulseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Steady,
    Sweep,
    Propagate,
    Switch,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    BField,
    RabiDrive,
    RabiA,
    RabiB,
    DetuningA,
    DetuningB,
    Temperature,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSource {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Core,
    Extended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub preset: Option<String>,
    pub scheme: Scheme,
    pub geometry: Geometry,
    pub atom: AtomSpec,
    pub b_field: f64,
    pub rabi_drive: Complex64,
    pub rabi_a: Complex64,
    pub rabi_b: Complex64,
    pub detuning_a: f64,
    pub detuning_b: f64,
    pub temperature: f64,
    pub doppler: bool,
    pub quadrature_order: usize,
    pub harmonic_order: Option<usize>,
    pub model: ModelChoice,
    pub envelope: Envelope,
    pub pulse_duration: f64,
    pub beam_area: f64,
    pub photon_number: Option<f64>,
    pub run: RunKind,
    pub sweep_variable: SweepVariable,
    pub sweep_start: f64,
    pub sweep_end: f64,
    pub sweep_samples: usize,
    pub length: f64,
    pub dz: f64,
    pub time_samples: usize,
    pub window: f64,
    pub alpha_source: AlphaSource,
}

impl Scenario {
    /// Scenario with every value taken from a preset, steady run type.
    pub fn from_preset(preset: &Preset, scheme: Scheme) -> Self {
        // The cross-absorption depth at the preset probes is ~0.2 mm, so that
        // scheme gets a sub-millimetre cell and a matching step.
        let (geometry, length, dz) = match scheme {
            Scheme::CrossPhase => (Geometry::CollinearDopplerFree, preset.length, 2e-4),
            Scheme::CrossAbsorption => (Geometry::PerpendicularColdGas, 5e-4, 2e-6),
        };
        Self {
            name: preset.name.to_string(),
            preset: Some(preset.name.to_string()),
            scheme,
            geometry,
            atom: preset.atom,
            b_field: preset.b_field,
            rabi_drive: preset.rabi_drive.into(),
            rabi_a: preset.rabi_probe.into(),
            rabi_b: preset.rabi_probe.into(),
            detuning_a: 0.0,
            detuning_b: 0.0,
            temperature: preset.temperature,
            doppler: false,
            quadrature_order: 16,
            harmonic_order: None,
            model: ModelChoice::Core,
            envelope: Envelope::Gaussian,
            pulse_duration: preset.pulse_duration,
            beam_area: preset.beam_area,
            photon_number: None,
            run: RunKind::Steady,
            sweep_variable: SweepVariable::RabiDrive,
            sweep_start: preset.rabi_drive.abs(),
            sweep_end: 2.0 * preset.rabi_drive.abs(),
            sweep_samples: 11,
            length,
            dz,
            time_samples: 513,
            window: 10.0 * preset.pulse_duration,
            alpha_source: AlphaSource::Analytic,
        }
    }

    pub fn constants(&self) -> PhysicalConstants {
        PhysicalConstants::CODATA
    }

    /// Resolved scheme configuration (light shifts not yet folded).
    pub fn config(&self) -> Result<SchemeConfig> {
        let constants = self.constants();
        let zeeman = zeeman_shifts(&self.atom, self.b_field, &constants)?;
        Ok(
            SchemeConfig::new(self.scheme, self.geometry, self.atom, zeeman, constants)?
                .with_drive(self.rabi_drive)
                .with_probes(self.rabi_a, self.rabi_b)
                .with_detunings(self.detuning_a, self.detuning_b),
        )
    }

    pub fn pulse(&self, rabi: Complex64) -> PulseSpec {
        let amplitude = match self.photon_number {
            Some(n) => PulseAmplitude::PhotonNumber(n),
            None => PulseAmplitude::PeakRabi(rabi),
        };
        PulseSpec {
            envelope: self.envelope,
            duration: self.pulse_duration,
            amplitude,
            beam_area: self.beam_area,
        }
    }

    pub fn pulses(&self) -> (PulseSpec, PulseSpec) {
        (self.pulse(self.rabi_a), self.pulse(self.rabi_b))
    }

    pub fn grid(&self) -> PropagationGrid {
        PropagationGrid {
            length: self.length,
            dz: self.dz,
            window: self.window,
            samples: self.time_samples,
            snapshots: 33,
        }
    }

    /// Copy with one swept variable set. Rabi sweeps set the magnitude, keeping the phase.
    pub fn with_sweep_value(&self, value: f64) -> Self {
        let mut s = self.clone();
        let set = |o: Complex64| {
            if o.norm() == 0.0 {
                value.into()
            } else {
                o / o.norm() * value
            }
        };
        match self.sweep_variable {
            SweepVariable::BField => s.b_field = value,
            SweepVariable::RabiDrive => s.rabi_drive = set(s.rabi_drive),
            SweepVariable::RabiA => s.rabi_a = set(s.rabi_a),
            SweepVariable::RabiB => s.rabi_b = set(s.rabi_b),
            SweepVariable::DetuningA => s.detuning_a = value,
            SweepVariable::DetuningB => s.detuning_b = value,
            SweepVariable::Temperature => s.temperature = value,
            SweepVariable::Density => s.atom.density = value,
        }
        s
    }

    /// Sample points of the sweep, in order.
    pub fn sweep_points(&self) -> Result<Vec<f64>> {
        let n = self.sweep_samples;
        if n == 0 {
            return Err(Error::Config("sweep needs at least one sample".into()));
        }
        if n == 1 {
            return Ok(vec![self.sweep_start]);
        }
        if self.sweep_start == self.sweep_end {
            return Err(Error::Config(
                "zero-length sweep range with more than one sample".into(),
            ));
        }
        Ok((0..n)
            .map(|k| {
                self.sweep_start + (self.sweep_end - self.sweep_start) * k as f64 / (n - 1) as f64
            })
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.atom.validate()?;
        self.config()?;
        if self.run == RunKind::Sweep {
            self.sweep_points()?;
        }
        if self.quadrature_order < 8 {
            return Err(Error::Config(format!(
                "quadrature_order must be at least 8, got {}",
                self.quadrature_order
            )));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::Config(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Physical dimension of a key, which decides the accepted unit suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    None,
    Frequency,
    Field,
    Density,
    Length,
    Time,
    Mass,
    Area,
    Temperature,
}

fn unit_factor(dim: Dim, unit: &str) -> Option<f64> {
    let f = match (dim, unit) {
        (Dim::Frequency, "rad/s") => 1.0,
        (Dim::Frequency, "Hz") => TAU,
        (Dim::Frequency, "kHz") => TAU * 1e3,
        (Dim::Frequency, "MHz") => TAU * 1e6,
        (Dim::Frequency, "GHz") => TAU * 1e9,
        (Dim::Frequency, "THz") => TAU * 1e12,
        (Dim::Field, "T") => 1.0,
        (Dim::Field, "mT") => 1e-3,
        (Dim::Field, "G") => 1e-4,
        (Dim::Density, "m^-3") => 1.0,
        (Dim::Density, "cm^-3") => 1e6,
        (Dim::Length, "m") => 1.0,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "mm") => 1e-3,
        (Dim::Length, "um") => 1e-6,
        (Dim::Time, "s") => 1.0,
        (Dim::Time, "ms") => 1e-3,
        (Dim::Time, "us") => 1e-6,
        (Dim::Time, "ns") => 1e-9,
        (Dim::Mass, "kg") => 1.0,
        (Dim::Mass, "amu") | (Dim::Mass, "u") => crate::atom::ATOMIC_MASS_UNIT,
        (Dim::Area, "m^2") => 1.0,
        (Dim::Area, "cm^2") => 1e-4,
        (Dim::Temperature, "K") => 1.0,
        (Dim::Temperature, "mK") => 1e-3,
        (Dim::Temperature, "uK") => 1e-6,
        _ => return None,
    };
    Some(f)
}

const KEYS: &[(&str, Dim)] = &[
    ("name", Dim::None),
    ("preset", Dim::None),
    ("scheme", Dim::None),
    ("geometry", Dim::None),
    ("omega0", Dim::Frequency),
    ("g_lower", Dim::None),
    ("g_upper", Dim::None),
    ("gamma", Dim::Frequency),
    ("mass", Dim::Mass),
    ("sigma0", Dim::Area),
    ("oscillator_strength", Dim::None),
    ("density", Dim::Density),
    ("b_field", Dim::Field),
    ("rabi_drive", Dim::Frequency),
    ("rabi_a", Dim::Frequency),
    ("rabi_b", Dim::Frequency),
    ("detuning_a", Dim::Frequency),
    ("detuning_b", Dim::Frequency),
    ("temperature", Dim::Temperature),
    ("doppler", Dim::None),
    ("quadrature_order", Dim::None),
    ("harmonic_order", Dim::None),
    ("model", Dim::None),
    ("envelope", Dim::None),
    ("pulse_duration", Dim::Time),
    ("beam_area", Dim::Area),
    ("photon_number", Dim::None),
    ("run", Dim::None),
    ("sweep_variable", Dim::None),
    ("sweep_start", Dim::None),
    ("sweep_end", Dim::None),
    ("sweep_samples", Dim::None),
    ("length", Dim::Length),
    ("dz", Dim::Length),
    ("time_samples", Dim::None),
    ("window", Dim::Time),
    ("alpha_source", Dim::None),
];

const REQUIRED_WITHOUT_PRESET: &[&str] = &[
    "omega0", "g_lower", "g_upper", "gamma", "mass", "density", "b_field",
];

struct Entry {
    line: usize,
    value: String,
    unit: Option<String>,
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn sweep_dim(v: SweepVariable) -> Dim {
    match v {
        SweepVariable::BField => Dim::Field,
        SweepVariable::RabiDrive | SweepVariable::RabiA | SweepVariable::RabiB => Dim::Frequency,
        SweepVariable::DetuningA | SweepVariable::DetuningB => Dim::Frequency,
        SweepVariable::Temperature => Dim::Temperature,
        SweepVariable::Density => Dim::Density,
    }
}

fn enum_value<T: for<'de> Deserialize<'de>>(e: &Entry, key: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(e.value.clone()))
        .map_err(|_| bad(e.line, format!("invalid value '{}' for {key}", e.value)))
}

fn scale(e: &Entry, key: &str, dim: Dim) -> Result<f64> {
    match (&e.unit, dim) {
        (None, _) => Ok(1.0),
        (Some(u), Dim::None) => Err(bad(
            e.line,
            format!("{key} is dimensionless; unexpected unit '{u}'"),
        )),
        (Some(u), d) => unit_factor(d, u)
            .ok_or_else(|| bad(e.line, format!("unit '{u}' is not valid for {key}"))),
    }
}

fn number(e: &Entry, key: &str, dim: Dim) -> Result<f64> {
    let x: f64 = e
        .value
        .parse()
        .map_err(|_| bad(e.line, format!("{key}: '{}' is not a number", e.value)))?;
    if !x.is_finite() {
        return Err(bad(e.line, format!("{key} must be finite")));
    }
    Ok(x * scale(e, key, dim)?)
}

fn complex(e: &Entry, key: &str) -> Result<Complex64> {
    let f = scale(e, key, Dim::Frequency)?;
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    let parse = |s: &str| -> Result<f64> {
        let x: f64 = s
            .parse()
            .map_err(|_| bad(e.line, format!("{key}: '{s}' is not a number")))?;
        if x.is_finite() {
            Ok(x * f)
        } else {
            Err(bad(e.line, format!("{key} must be finite")))
        }
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(parse(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(parse(re)?, parse(im)?)),
        _ => Err(bad(e.line, format!("{key}: expected 're' or 're,im'"))),
    }
}

fn count(e: &Entry, key: &str) -> Result<usize> {
    scale(e, key, Dim::None)?;
    e.value.parse().map_err(|_| {
        bad(
            e.line,
            format!("{key}: '{}' is not a non-negative integer", e.value),
        )
    })
}

fn boolean(e: &Entry, key: &str) -> Result<bool> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(e.line, format!("{key}: expected true or false"))),
    }
}

/// Splits `value [unit]`. Text keys keep the whole right-hand side; numeric
/// keys treat a trailing non-numeric token as the unit and drop inner spaces
/// so `3, 4 MHz` reads as the complex value `3,4`.
fn split_unit(key: &str, rest: &str) -> (String, Option<String>) {
    let numeric =
        KEYS.iter().any(|(k, d)| *k == key && *d != Dim::None) || key.starts_with("sweep_");
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    if !numeric {
        return (rest.to_string(), None);
    }
    match tokens.split_last() {
        Some((last, init))
            if !init.is_empty() && last.trim_end_matches(',').parse::<f64>().is_err() =>
        {
            (init.concat(), Some(last.to_string()))
        }
        _ => (tokens.concat(), None),
    }
}

/// Parses one quantity for a known numeric key, with an optional unit that
/// may be attached (`10mK`) or space-separated (`10 mK`). Used for
/// command-line overrides.
pub fn parse_value(key: &str, text: &str) -> Result<f64> {
    let &(_, dim) = KEYS
        .iter()
        .find(|(k, d)| *k == key && *d != Dim::None)
        .ok_or_else(|| Error::Config(format!("'{key}' is not a dimensioned key")))?;
    let text = text.trim();
    let split = (0..=text.len())
        .rev()
        .filter(|&i| text.is_char_boundary(i))
        .find(|&i| text[..i].trim().parse::<f64>().is_ok())
        .ok_or_else(|| Error::Config(format!("{key}: '{text}' is not a number")))?;
    let (value, unit) = (text[..split].trim(), text[split..].trim());
    let e = Entry {
        line: 0,
        value: value.to_string(),
        unit: (!unit.is_empty()).then(|| unit.to_string()),
    };
    number(&e, key, dim).map_err(|err| match err {
        Error::Parse { message, .. } => Error::Config(message),
        other => other,
    })
}

/// Parses a scenario document.
pub fn parse(text: &str) -> Result<Scenario> {
    let mut entries: BTreeMap<&str, Entry> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content
            .split_once('=')
            .ok_or_else(|| bad(line, "expected 'key = value'"))?;
        let key = key.trim();
        let &(known, _) = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| bad(line, format!("unknown key '{key}'")))?;
        if entries.contains_key(known) {
            return Err(bad(line, format!("duplicate key '{key}'")));
        }
        let rest = rest.trim();
        if rest.is_empty() {
            return Err(bad(line, format!("missing value for '{key}'")));
        }
        let (value, unit) = split_unit(known, rest);
        entries.insert(known, Entry { line, value, unit });
    }

    let scheme = match entries.get("scheme") {
        Some(e) => enum_value(e, "scheme")?,
        None => Scheme::CrossPhase,
    };
    let mut s = match entries.get("preset") {
        Some(e) => {
            let p = presets::by_name(&e.value)
                .ok_or_else(|| bad(e.line, format!("unknown preset '{}'", e.value)))?;
            Scenario::from_preset(&p, scheme)
        }
        None => {
            if let Some(missing) = REQUIRED_WITHOUT_PRESET
                .iter()
                .find(|k| !entries.contains_key(*k))
            {
                return Err(bad(
                    0,
                    format!("'{missing}' is required when no preset is given"),
                ));
            }
            let mut s = Scenario::from_preset(&presets::rb87_d1(), scheme);
            s.name = "scenario".into();
            s.preset = None;
            s.rabi_drive = 0.0.into();
            s.rabi_a = 0.0.into();
            s.rabi_b = 0.0.into();
            s
        }
    };

    let dim = |key: &str| {
        KEYS.iter()
            .find(|(k, _)| *k == key)
            .map(|(_, d)| *d)
            .unwrap_or(Dim::None)
    };
    if let Some(e) = entries.get("sweep_variable") {
        s.sweep_variable = enum_value(e, "sweep_variable")?;
    }
    // Oscillator strength sets σ₀ unless σ₀ is given directly.
    let mut sigma_from_strength = None;
    for (&key, e) in &entries {
        match key {
            "name" => s.name = e.value.clone(),
            "preset" | "scheme" | "sweep_variable" => {}
            "geometry" => s.geometry = enum_value(e, key)?,
            "omega0" => s.atom.omega0 = number(e, key, dim(key))?,
            "g_lower" => s.atom.g_lower = number(e, key, dim(key))?,
            "g_upper" => s.atom.g_upper = number(e, key, dim(key))?,
            "gamma" => s.atom.gamma = number(e, key, dim(key))?,
            "mass" => s.atom.mass = number(e, key, dim(key))?,
            "sigma0" => s.atom.sigma0 = number(e, key, dim(key))?,
            "oscillator_strength" => {
                sigma_from_strength = Some((number(e, key, dim(key))?, e.line))
            }
            "density" => s.atom.density = number(e, key, dim(key))?,
            "b_field" => s.b_field = number(e, key, dim(key))?,
            "rabi_drive" => s.rabi_drive = complex(e, key)?,
            "rabi_a" => s.rabi_a = complex(e, key)?,
            "rabi_b" => s.rabi_b = complex(e, key)?,
            "detuning_a" => s.detuning_a = number(e, key, dim(key))?,
            "detuning_b" => s.detuning_b = number(e, key, dim(key))?,
            "temperature" => s.temperature = number(e, key, dim(key))?,
            "doppler" => s.doppler = boolean(e, key)?,
            "quadrature_order" => s.quadrature_order = count(e, key)?,
            "harmonic_order" => s.harmonic_order = Some(count(e, key)?),
            "model" => s.model = enum_value(e, key)?,
            "envelope" => s.envelope = enum_value(e, key)?,
            "pulse_duration" => s.pulse_duration = number(e, key, dim(key))?,
            "beam_area" => s.beam_area = number(e, key, dim(key))?,
            "photon_number" => s.photon_number = Some(number(e, key, dim(key))?),
            "run" => s.run = enum_value(e, key)?,
            "sweep_start" => s.sweep_start = number(e, key, sweep_dim(s.sweep_variable))?,
            "sweep_end" => s.sweep_end = number(e, key, sweep_dim(s.sweep_variable))?,
            "sweep_samples" => s.sweep_samples = count(e, key)?,
            "length" => s.length = number(e, key, dim(key))?,
            "dz" => s.dz = number(e, key, dim(key))?,
            "time_samples" => s.time_samples = count(e, key)?,
            "window" => s.window = number(e, key, dim(key))?,
            "alpha_source" => s.alpha_source = enum_value(e, key)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    if let Some((f, line)) = sigma_from_strength {
        if entries.contains_key("sigma0") {
            return Err(bad(
                line,
                "give either sigma0 or oscillator_strength, not both",
            ));
        }
        if !(f > 0.0) {
            return Err(bad(line, "oscillator_strength must be positive"));
        }
        s.atom.sigma0 = resonant_cross_section(s.atom.omega0, f, &s.constants());
    }
    if s.scheme == Scheme::CrossAbsorption && !entries.contains_key("geometry") {
        s.geometry = Geometry::PerpendicularColdGas;
    }
    Ok(s)
}

fn enum_text<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("unit enums serialize as strings"),
    }
}

fn complex_text(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{:e}", c.re)
    } else {
        format!("{:e},{:e}", c.re, c.im)
    }
}

/// Writes every field explicitly in SI, so no defaults are left implicit.
pub fn serialize(s: &Scenario) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("name", s.name.clone());
    if let Some(p) = &s.preset {
        put("preset", p.clone());
    }
    put("scheme", enum_text(&s.scheme));
    put("geometry", enum_text(&s.geometry));
    put("omega0", format!("{:e}", s.atom.omega0));
    put("g_lower", format!("{:e}", s.atom.g_lower));
    put("g_upper", format!("{:e}", s.atom.g_upper));
    put("gamma", format!("{:e}", s.atom.gamma));
    put("mass", format!("{:e}", s.atom.mass));
    put("sigma0", format!("{:e}", s.atom.sigma0));
    put("density", format!("{:e}", s.atom.density));
    put("b_field", format!("{:e}", s.b_field));
    put("rabi_drive", complex_text(s.rabi_drive));
    put("rabi_a", complex_text(s.rabi_a));
    put("rabi_b", complex_text(s.rabi_b));
    put("detuning_a", format!("{:e}", s.detuning_a));
    put("detuning_b", format!("{:e}", s.detuning_b));
    put("temperature", format!("{:e}", s.temperature));
    put("doppler", s.doppler.to_string());
    put("quadrature_order", s.quadrature_order.to_string());
    if let Some(m) = s.harmonic_order {
        put("harmonic_order", m.to_string());
    }
    put("model", enum_text(&s.model));
    put("envelope", enum_text(&s.envelope));
    put("pulse_duration", format!("{:e}", s.pulse_duration));
    put("beam_area", format!("{:e}", s.beam_area));
    if let Some(n) = s.photon_number {
        put("photon_number", format!("{n:e}"));
    }
    put("run", enum_text(&s.run));
    put("sweep_variable", enum_text(&s.sweep_variable));
    put("sweep_start", format!("{:e}", s.sweep_start));
    put("sweep_end", format!("{:e}", s.sweep_end));
    put("sweep_samples", s.sweep_samples.to_string());
    put("length", format!("{:e}", s.length));
    put("dz", format!("{:e}", s.dz));
    put("time_samples", s.time_samples.to_string());
    put("window", format!("{:e}", s.window));
    put("alpha_source", enum_text(&s.alpha_source));
    out
}
