//! Subcommand bodies. Each resolves a scenario, runs the library and writes
//! its artifacts into the output directory.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use zeeman_xpm::atom::{presets, validate_regime, RegimeThresholds, Scheme, SchemeConfig};
use zeeman_xpm::dynamics::VelocityClass;
use zeeman_xpm::io::{self, Cell, Table};
use zeeman_xpm::propagation::{
    chirp_diagnostics, propagate as march, switching_report, PropagationMode,
};
use zeeman_xpm::response::{
    approx_forms, doppler_average_with, group_velocity, polarizability_analytic,
    polarizability_numeric_with, with_group_velocity, DynamicsModel, NumericOptions,
    ResponseResult, ThermalEnsemble,
};
use zeeman_xpm::scenario::{self, AlphaSource, ModelChoice, RunKind, Scenario, SweepVariable};
use zeeman_xpm::validation::{mutation_detected, CriterionResult, ValidationReport, CRITERIA};
use zeeman_xpm::Error;

use crate::{Format, GlobalArgs};

pub enum Status {
    Ok,
    ValidationFailed,
}

/// 2 for bad input, 3 for numerical failures.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if !err.is_config() => 3,
        _ => 2,
    }
}

/// Key/value pairs written next to the scenario in every artifact.
#[derive(Default)]
struct Meta {
    pairs: Vec<(String, String)>,
    warnings: Vec<String>,
}

impl Meta {
    fn set(&mut self, key: &str, value: impl ToString) {
        self.pairs.push((key.to_string(), value.to_string()));
    }

    fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    fn text(&self, s: Option<&Scenario>) -> String {
        let mut out = s.map(scenario::serialize).unwrap_or_default();
        for (k, v) in &self.pairs {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning = {w}\n"));
        }
        out
    }

    fn json(&self, s: Option<&Scenario>) -> Value {
        let mut m = Map::new();
        if let Some(s) = s {
            let fields: Map<String, Value> = scenario::serialize(s)
                .lines()
                .filter_map(|l| l.split_once(" = "))
                .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
                .collect();
            m.insert("scenario".into(), Value::Object(fields));
        }
        for (k, v) in &self.pairs {
            m.insert(k.clone(), Value::String(v.clone()));
        }
        m.insert("warnings".into(), json!(self.warnings));
        Value::Object(m)
    }
}

fn load(g: &GlobalArgs, default_scheme: Scheme, run: RunKind) -> Result<Scenario> {
    let mut s = match &g.scenario {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            scenario::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => {
            let p = presets::by_name(&g.preset)
                .ok_or_else(|| Error::Config(format!("unknown preset '{}'", g.preset)))?;
            Scenario::from_preset(&p, default_scheme)
        }
    };
    s.run = run;
    s.validate()?;
    Ok(s)
}

fn output_path(g: &GlobalArgs, stem: &str, ext: &str) -> Result<PathBuf> {
    fs::create_dir_all(&g.out)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", g.out.display())))?;
    Ok(g.out.join(format!("{stem}.{ext}")))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_table(
    g: &GlobalArgs,
    stem: &str,
    s: Option<&Scenario>,
    meta: &Meta,
    table: &Table,
) -> Result<PathBuf> {
    let path = match g.format {
        Format::Csv => output_path(g, stem, "csv")?,
        Format::Json => output_path(g, stem, "json")?,
    };
    let w = create(&path)?;
    match g.format {
        Format::Csv => io::write_csv(w, &meta.text(s), table)?,
        Format::Json => io::write_json(w, &meta.json(s), &io::table_json(table))?,
    }
    Ok(path)
}

fn write_document(
    g: &GlobalArgs,
    stem: &str,
    s: Option<&Scenario>,
    meta: &Meta,
    data: &Value,
) -> Result<PathBuf> {
    let path = output_path(g, stem, "json")?;
    io::write_json(create(&path)?, &meta.json(s), data)?;
    Ok(path)
}

/// Which response a row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Row {
    Numeric,
    ClosedForm,
    Approximate,
}

fn options(s: &Scenario) -> NumericOptions {
    let model = match s.model {
        ModelChoice::Core => DynamicsModel::Core,
        ModelChoice::Extended => NumericOptions::extended().model,
    };
    NumericOptions {
        model,
        order: s.harmonic_order,
    }
}

fn folded(s: &Scenario) -> Result<SchemeConfig> {
    Ok(s.config()?.folded()?)
}

fn response(s: &Scenario, row: Row) -> Result<ResponseResult> {
    let config = folded(s)?;
    let gamma = config.atom().gamma;
    let r = match row {
        Row::Numeric if s.doppler => {
            let ens = ThermalEnsemble::new(&config, s.temperature, s.quadrature_order)?;
            doppler_average_with(&config, &ens, &options(s))?.result
        }
        Row::Numeric => {
            let mut r =
                polarizability_numeric_with(&config, &VelocityClass::at_rest(), &options(s))?;
            if config.scheme() == Scheme::CrossPhase {
                match group_velocity(&config, None) {
                    Ok(gv) => r = with_group_velocity(r, &gv),
                    Err(e) => r.warnings.push(format!("group velocity unavailable: {e}")),
                }
            }
            r
        }
        Row::ClosedForm => {
            let mut r = polarizability_analytic(&config)?;
            let estimate = config.rabi_drive().norm_sqr() / (config.atom().alpha0() * gamma);
            r.group_velocity_a = Some(estimate);
            r.group_velocity_b = Some(estimate);
            r
        }
        Row::Approximate => {
            let f = approx_forms(&config)?;
            f.large_splitting
                .or(f.cross_absorption)
                .ok_or_else(|| Error::Config("no approximate form".into()))?
        }
    };
    Ok(r)
}

/// The scenario's current value of its sweep variable, used as the row parameter.
fn current_value(s: &Scenario) -> f64 {
    match s.sweep_variable {
        SweepVariable::BField => s.b_field,
        SweepVariable::RabiDrive => s.rabi_drive.norm(),
        SweepVariable::RabiA => s.rabi_a.norm(),
        SweepVariable::RabiB => s.rabi_b.norm(),
        SweepVariable::DetuningA => s.detuning_a,
        SweepVariable::DetuningB => s.detuning_b,
        SweepVariable::Temperature => s.temperature,
        SweepVariable::Density => s.atom.density,
    }
}

/// Errors that only mean an approximate form does not apply here.
fn not_applicable(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::Precondition(_) | Error::Singular(_) | Error::Config(_))
    )
}

pub fn steady(g: &GlobalArgs, doppler: Option<&str>) -> Result<Status> {
    let mut s = load(g, Scheme::CrossPhase, RunKind::Steady)?;
    if let Some(arg) = doppler {
        let value = arg.trim().strip_prefix("T=").unwrap_or(arg);
        s.temperature = scenario::parse_value("temperature", value)?;
        s.doppler = true;
        s.validate()?;
    }
    let rows = match s.scheme {
        Scheme::CrossPhase => vec![Row::Numeric, Row::ClosedForm, Row::Approximate],
        Scheme::CrossAbsorption => vec![Row::Numeric, Row::Approximate],
    };
    let mut meta = Meta::default();
    let mut table = Table::new(io::RESPONSE_COLUMNS);
    let parameter = current_value(&s);
    for row in rows {
        match response(&s, row) {
            Ok(r) => {
                r.warnings.iter().for_each(|w| meta.warn(w.clone()));
                table.push(io::response_row(parameter, &r));
            }
            Err(e) if row != Row::Numeric && not_applicable(&e) => {
                meta.warn(format!("{row:?} row skipped: {e:#}"))
            }
            Err(e) => return Err(e),
        }
    }
    meta.set("doppler_averaged", s.doppler);
    let path = write_table(g, "response", Some(&s), &meta, &table)?;

    let config = folded(&s)?;
    let regime = validate_regime(
        &config,
        s.temperature,
        s.pulse_duration,
        &RegimeThresholds::default(),
    );
    for c in regime.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "warning: regime check {} ({}) fails with margin {:.3e}",
            c.name, c.description, c.margin
        );
    }
    let regime_path = write_document(
        g,
        "regime",
        Some(&s),
        &Meta::default(),
        &serde_json::to_value(&regime)?,
    )?;
    println!("wrote {} and {}", path.display(), regime_path.display());
    Ok(Status::Ok)
}

fn sweep_row(s: &Scenario) -> Row {
    match (s.alpha_source, s.scheme) {
        (AlphaSource::Numeric, _) => Row::Numeric,
        (AlphaSource::Analytic, Scheme::CrossPhase) => Row::ClosedForm,
        (AlphaSource::Analytic, Scheme::CrossAbsorption) => Row::Approximate,
    }
}

pub fn sweep(g: &GlobalArgs) -> Result<Status> {
    let s = load(g, Scheme::CrossPhase, RunKind::Sweep)?;
    let row = sweep_row(&s);
    let points = s.sweep_points()?;
    let results: Vec<ResponseResult> = points
        .par_iter()
        .map(|&v| response(&s.with_sweep_value(v), row))
        .collect::<Result<_>>()?;
    let mut meta = Meta::default();
    let mut table = Table::new(io::RESPONSE_COLUMNS);
    for (&v, r) in points.iter().zip(&results) {
        r.warnings.iter().for_each(|w| meta.warn(w.clone()));
        table.push(io::response_row(v, r));
    }
    meta.set("doppler_averaged", s.doppler && row == Row::Numeric);
    let path = write_table(g, "sweep", Some(&s), &meta, &table)?;
    println!("wrote {} ({} rows)", path.display(), table.rows.len());
    Ok(Status::Ok)
}

fn mode(s: &Scenario) -> PropagationMode {
    match s.alpha_source {
        AlphaSource::Analytic => PropagationMode::AnalyticAlpha,
        AlphaSource::Numeric => PropagationMode::NumericAlpha,
    }
}

pub fn propagate(g: &GlobalArgs) -> Result<Status> {
    let s = load(g, Scheme::CrossPhase, RunKind::Propagate)?;
    let config = folded(&s)?;
    let (pa, pb) = s.pulses();
    let r = march(&config, &pa, &pb, &s.grid(), mode(&s))?;
    let chirp = chirp_diagnostics(&r, &config)?;
    let mut meta = Meta::default();
    r.warnings.iter().for_each(|w| meta.warn(w.clone()));
    if chirp.exceeds_window {
        meta.warn("exit spectrum is wider than the transparency window");
    }
    let path = write_table(
        g,
        "propagation",
        Some(&s),
        &meta,
        &io::propagation_table(&r),
    )?;
    let energies: Vec<Value> = r
        .energies()
        .into_iter()
        .map(|(z, a, b)| json!({ "z": z, "a": a, "b": b }))
        .collect();
    let summary = json!({
        "phase_a": r.phase_a,
        "phase_b": r.phase_b,
        "absorption_a": r.absorption_a,
        "absorption_b": r.absorption_b,
        "group_velocity": r.group_velocity,
        "steps": r.steps,
        "energies": energies,
        "chirp": {
            "max_chirp_a": chirp.max_chirp_a,
            "max_chirp_b": chirp.max_chirp_b,
            "spectral_width_a": chirp.spectral_width_a,
            "spectral_width_b": chirp.spectral_width_b,
            "window": chirp.window,
            "exceeds_window": chirp.exceeds_window,
        },
    });
    let summary_path = write_document(g, "propagation_summary", Some(&s), &meta, &summary)?;
    println!(
        "phase_a = {:.6e}, phase_b = {:.6e}, absorption_a = {:.6e}, absorption_b = {:.6e}",
        r.phase_a, r.phase_b, r.absorption_a, r.absorption_b
    );
    println!("wrote {} and {}", path.display(), summary_path.display());
    Ok(Status::Ok)
}

pub fn switch(g: &GlobalArgs) -> Result<Status> {
    let s = load(g, Scheme::CrossAbsorption, RunKind::Switch)?;
    let config = folded(&s)?;
    let (pa, pb) = s.pulses();
    let r = switching_report(&config, &pa, &pb, &s.grid(), mode(&s))?;
    let mut meta = Meta::default();
    r.warnings.iter().for_each(|w| meta.warn(w.clone()));
    let mut table = Table::new(&[
        "transmission_with_partner",
        "transmission_without_partner",
        "depth",
        "atoms_in_depth",
    ]);
    table.push(vec![
        r.transmission_with_partner.into(),
        r.transmission_without_partner.into(),
        r.depth.into(),
        r.atoms_in_depth.into(),
    ]);
    let path = write_table(g, "switch", Some(&s), &meta, &table)?;
    println!(
        "transmission {:.6e} with E_b, {:.6e} without; depth {:.6e} m",
        r.transmission_with_partner, r.transmission_without_partner, r.depth
    );
    println!("wrote {}", path.display());
    Ok(Status::Ok)
}

fn validation_table(criteria: &[CriterionResult]) -> Table {
    let mut t = Table::new(&[
        "criterion",
        "name",
        "criterion_passed",
        "measurement",
        "value",
        "expected",
        "tolerance",
        "relative",
        "passed",
    ]);
    for c in criteria {
        let head = |t: &mut Table,
                    label: String,
                    value: f64,
                    expected: f64,
                    tol: f64,
                    rel: bool,
                    passed: bool| {
            t.push(vec![
                Cell::Int(c.id.into()),
                c.name.as_str().into(),
                c.passed.into(),
                Cell::Text(label),
                value.into(),
                expected.into(),
                tol.into(),
                rel.into(),
                passed.into(),
            ]);
        };
        for m in &c.measurements {
            head(
                &mut t,
                m.label.clone(),
                m.value,
                m.expected,
                m.tolerance,
                m.relative,
                m.passed,
            );
        }
        if let Some(e) = &c.error {
            head(
                &mut t,
                format!("error: {e}"),
                f64::NAN,
                f64::NAN,
                f64::NAN,
                false,
                false,
            );
        }
    }
    t
}

pub fn validate(g: &GlobalArgs, ids: &[u32]) -> Result<Status> {
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.id == **id)) {
        return Err(Error::Config(format!("no criterion with id {bad}")).into());
    }
    let selected: Vec<_> = CRITERIA
        .iter()
        .filter(|c| ids.is_empty() || ids.contains(&c.id))
        .copied()
        .collect();
    let (criteria, mutation) = rayon::join(
        || selected.par_iter().map(|c| c.run()).collect::<Vec<_>>(),
        mutation_detected,
    );
    let report = ValidationReport {
        criteria,
        mutation_detected: mutation,
    };
    for c in &report.criteria {
        println!("{}", c.line());
        for d in c.details() {
            println!("    {d}");
        }
    }
    println!(
        "mutation check {}",
        if report.mutation_detected {
            "PASS"
        } else {
            "FAIL"
        }
    );
    let mut meta = Meta::default();
    meta.set("mutation_detected", report.mutation_detected);
    meta.set("all_passed", report.all_passed());
    for c in &report.criteria {
        for n in &c.notes {
            meta.set(&format!("note_{}", c.id), n);
        }
    }
    let path = match g.format {
        Format::Csv => write_table(
            g,
            "validation",
            None,
            &meta,
            &validation_table(&report.criteria),
        )?,
        Format::Json => write_document(
            g,
            "validation",
            None,
            &meta,
            &serde_json::to_value(&report)?,
        )?,
    };
    println!("wrote {}", path.display());
    Ok(if report.all_passed() {
        Status::Ok
    } else {
        Status::ValidationFailed
    })
}
