//! Physical configuration of the six-state atom: constants, level shifts,
//! field tunings for both coupling schemes and regime-validity checks.
//!
//! Everything is SI with angular frequencies in rad/s. Lower states are
//! |1>, |2>, |3> with M = +1, 0, -1 and upper states |4>, |5>, |6> likewise;
//! the drives couple |1>-|4> and |3>-|6>, and |2> is the initial reservoir.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fundamental constants. Values are CODATA 2018 and can only be changed
/// through [`PhysicalConstants::with_override`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    bohr_magneton_over_hbar: f64,
    light_speed: f64,
    boltzmann: f64,
    vacuum_permittivity: f64,
    hbar: f64,
}

pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

impl PhysicalConstants {
    pub const CODATA: Self = Self {
        bohr_magneton_over_hbar: 9.274_010_078_3e-24 / 1.054_571_817e-34,
        light_speed: 299_792_458.0,
        boltzmann: 1.380_649e-23,
        vacuum_permittivity: 8.854_187_812_8e-12,
        hbar: 1.054_571_817e-34,
    };

    /// Explicit hook for tests and sensitivity studies.
    pub fn with_override(
        bohr_magneton_over_hbar: f64,
        light_speed: f64,
        boltzmann: f64,
        vacuum_permittivity: f64,
        hbar: f64,
    ) -> Result<Self> {
        let c = Self {
            bohr_magneton_over_hbar,
            light_speed,
            boltzmann,
            vacuum_permittivity,
            hbar,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.bohr_magneton_over_hbar,
            self.light_speed,
            self.boltzmann,
            self.vacuum_permittivity,
            self.hbar,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::Domain(
                "physical constants must be finite and positive".into(),
            ))
        }
    }

    pub fn bohr_magneton_over_hbar(&self) -> f64 {
        self.bohr_magneton_over_hbar
    }
    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }
    pub fn boltzmann(&self) -> f64 {
        self.boltzmann
    }
    pub fn vacuum_permittivity(&self) -> f64 {
        self.vacuum_permittivity
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Unperturbed lower-upper separation, rad/s.
    pub omega0: f64,
    pub g_lower: f64,
    pub g_upper: f64,
    /// Relaxation rate of the upper states, 1/s.
    pub gamma: f64,
    pub mass: f64,
    /// Resonant absorption cross-section, m².
    pub sigma0: f64,
    /// Number density, 1/m³.
    pub density: f64,
}

impl AtomSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega0", self.omega0),
            ("gamma", self.gamma),
            ("mass", self.mass),
            ("sigma0", self.sigma0),
            ("density", self.density),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if !self.g_lower.is_finite() || !self.g_upper.is_finite() {
            return Err(Error::Domain("g factors must be finite".into()));
        }
        Ok(())
    }

    /// Linear resonant absorption coefficient σ₀N, 1/m.
    pub fn alpha0(&self) -> f64 {
        self.sigma0 * self.density
    }

    pub fn wavelength(&self, constants: &PhysicalConstants) -> f64 {
        std::f64::consts::TAU * constants.light_speed() / self.omega0
    }
}

/// Two-level resonant cross-section `f · 3λ²/2π` for oscillator-strength factor `f`.
pub fn resonant_cross_section(
    omega0: f64,
    oscillator_strength: f64,
    constants: &PhysicalConstants,
) -> f64 {
    let lambda = std::f64::consts::TAU * constants.light_speed() / omega0;
    oscillator_strength * 3.0 * lambda * lambda / std::f64::consts::TAU
}

/// Signed Zeeman shifts of the M = +1 sublevels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanSplitting {
    pub b_field: f64,
    pub delta_lower: f64,
    pub delta_upper: f64,
    pub delta_d: f64,
}

pub fn zeeman_shifts(
    atom: &AtomSpec,
    b_field: f64,
    constants: &PhysicalConstants,
) -> Result<ZeemanSplitting> {
    if !b_field.is_finite() {
        return Err(Error::Domain(format!(
            "magnetic field must be finite, got {b_field}"
        )));
    }
    let mu = constants.bohr_magneton_over_hbar();
    let delta_lower = mu * atom.g_lower * b_field;
    let delta_upper = mu * atom.g_upper * b_field;
    Ok(ZeemanSplitting {
        b_field,
        delta_lower,
        delta_upper,
        delta_d: delta_lower - delta_upper,
    })
}

/// Field which gives `delta_d` for the atom's g factors.
pub fn field_for_splitting(
    atom: &AtomSpec,
    delta_d: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let dg = atom.g_lower - atom.g_upper;
    if dg == 0.0 {
        return Err(Error::Singular(
            "g_lower == g_upper: the splitting does not depend on B".into(),
        ));
    }
    Ok(delta_d / (constants.bohr_magneton_over_hbar() * dg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    CrossPhase,
    CrossAbsorption,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    CollinearDopplerFree,
    PerpendicularColdGas,
}

/// Light shifts of |1> and |3> from the off-resonant drive partners.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StarkShifts {
    pub state1: f64,
    pub state3: f64,
}

/// Resolved field and detuning configuration for one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    scheme: Scheme,
    geometry: Geometry,
    atom: AtomSpec,
    zeeman: ZeemanSplitting,
    constants: PhysicalConstants,
    rabi_drive: Complex64,
    rabi_a: Complex64,
    rabi_b: Complex64,
    detuning_a: f64,
    detuning_b: f64,
    wavenumber: f64,
    stark: Option<StarkShifts>,
}

impl SchemeConfig {
    /// Config with zero fields and detunings; set them with the `with_*` builders.
    pub fn new(
        scheme: Scheme,
        geometry: Geometry,
        atom: AtomSpec,
        zeeman: ZeemanSplitting,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        atom.validate()?;
        if scheme == Scheme::CrossAbsorption && geometry == Geometry::CollinearDopplerFree {
            return Err(Error::Config(
                "the cross-absorption scheme needs the perpendicular cold-gas geometry; in the collinear one E_b is \
                 resonant with |2>-|4> and is absorbed unconditionally"
                    .into(),
            ));
        }
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self {
            scheme,
            geometry,
            atom,
            zeeman,
            constants,
            rabi_drive: zero,
            rabi_a: zero,
            rabi_b: zero,
            detuning_a: 0.0,
            detuning_b: 0.0,
            wavenumber: atom.omega0 / constants.light_speed(),
            stark: None,
        })
    }

    // Builders clear any folded Stark shifts, which would otherwise go stale.

    pub fn with_drive(mut self, rabi_drive: Complex64) -> Self {
        self.rabi_drive = rabi_drive;
        self.stark = None;
        self
    }

    pub fn with_probes(mut self, rabi_a: Complex64, rabi_b: Complex64) -> Self {
        self.rabi_a = rabi_a;
        self.rabi_b = rabi_b;
        self
    }

    pub fn with_detunings(mut self, detuning_a: f64, detuning_b: f64) -> Self {
        self.detuning_a = detuning_a;
        self.detuning_b = detuning_b;
        self
    }

    pub fn with_zeeman(mut self, zeeman: ZeemanSplitting) -> Self {
        self.zeeman = zeeman;
        self.stark = None;
        self
    }

    pub fn with_atom(mut self, atom: AtomSpec) -> Result<Self> {
        atom.validate()?;
        self.wavenumber = atom.omega0 / self.constants.light_speed();
        self.atom = atom;
        self.stark = None;
        Ok(self)
    }

    /// Marks explicit shifts as folded in. [`stark_shifts`] is the usual route.
    pub fn with_stark(mut self, shifts: StarkShifts) -> Self {
        self.stark = Some(shifts);
        self
    }

    pub fn without_stark(mut self) -> Self {
        self.stark = None;
        self
    }

    /// Drive-folded copy of this config.
    pub fn folded(&self) -> Result<Self> {
        stark_shifts(self).map(|(_, c)| c)
    }

    /// The mirrored configuration: probes and their detunings exchanged and
    /// the field reversed. With states relabelled 1↔3, 4↔6 the dynamics map
    /// onto each other.
    pub fn probe_swapped(&self) -> Self {
        let mut c = self.clone();
        std::mem::swap(&mut c.rabi_a, &mut c.rabi_b);
        std::mem::swap(&mut c.detuning_a, &mut c.detuning_b);
        c.zeeman = ZeemanSplitting {
            b_field: -self.zeeman.b_field,
            delta_lower: -self.zeeman.delta_lower,
            delta_upper: -self.zeeman.delta_upper,
            delta_d: -self.zeeman.delta_d,
        };
        if self.stark.is_some() {
            c.stark = None;
            c.stark = stark_shifts(&c).ok().and_then(|(_, f)| f.stark);
        }
        c
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    pub fn atom(&self) -> &AtomSpec {
        &self.atom
    }
    pub fn zeeman(&self) -> &ZeemanSplitting {
        &self.zeeman
    }
    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }
    pub fn rabi_drive(&self) -> Complex64 {
        self.rabi_drive
    }
    pub fn rabi_a(&self) -> Complex64 {
        self.rabi_a
    }
    pub fn rabi_b(&self) -> Complex64 {
        self.rabi_b
    }
    pub fn detuning_a(&self) -> f64 {
        self.detuning_a
    }
    pub fn detuning_b(&self) -> f64 {
        self.detuning_b
    }
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }
    pub fn stark(&self) -> Option<StarkShifts> {
        self.stark
    }
    pub fn stark_incorporated(&self) -> bool {
        self.stark.is_some()
    }

    /// Splitting seen by the core model. In the cross-phase scheme the light
    /// shifts of |1> and |3> move both dispersive |1>,|3> - |5> couplings by
    /// the same amount, which is absorbed into Δ_D. In the cross-absorption
    /// scheme the shifts are measured into δ_a, δ_b instead.
    pub fn effective_delta_d(&self) -> f64 {
        match (self.scheme, self.stark) {
            (Scheme::CrossPhase, Some(s)) => self.zeeman.delta_d + 0.5 * (s.state3 - s.state1),
            _ => self.zeeman.delta_d,
        }
    }

    /// Transparency window |Ω_d|²/γ.
    pub fn transparency_window(&self) -> f64 {
        self.rabi_drive.norm_sqr() / self.atom.gamma
    }
}

/// Light shifts of |1> and |3> and the config with them folded in.
///
/// Cross-phase: the drive partners sit at ∓2Δ_D, shifts (-|Ω_d|²/2Δ_D, +|Ω_d|²/2Δ_D).
/// Cross-absorption: |1> sees E_d2 at -3Δ_D and |3> sees E_d1 at +Δ_D, so the
/// second-order shifts are (-|Ω_d|²/3Δ_D, +|Ω_d|²/Δ_D).
pub fn stark_shifts(config: &SchemeConfig) -> Result<(StarkShifts, SchemeConfig)> {
    let d = config.zeeman.delta_d;
    let od2 = config.rabi_drive.norm_sqr();
    if od2 == 0.0 {
        return Ok((
            StarkShifts::default(),
            config.clone().with_stark(StarkShifts::default()),
        ));
    }
    if d == 0.0 {
        return Err(Error::Singular(
            "Δ_D = 0: drive partner transitions are resonant, light shifts diverge".into(),
        ));
    }
    let shifts = match config.scheme {
        Scheme::CrossPhase => StarkShifts {
            state1: -od2 / (2.0 * d),
            state3: od2 / (2.0 * d),
        },
        Scheme::CrossAbsorption => StarkShifts {
            state1: -od2 / (3.0 * d),
            state3: od2 / d,
        },
    };
    Ok((shifts, config.clone().with_stark(shifts)))
}

/// Most-probable speed u = √(2k_BT/m) (Maxwellian width) and the quoted
/// mean thermal speed v̄ = √(3k_BT/m).
pub fn thermal_speeds(
    atom: &AtomSpec,
    temperature: f64,
    constants: &PhysicalConstants,
) -> (f64, f64) {
    let kt_m = constants.boltzmann() * temperature.max(0.0) / atom.mass;
    ((2.0 * kt_m).sqrt(), (3.0 * kt_m).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    /// Ratio that operationalizes "much greater than".
    pub much_greater: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { much_greater: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub description: String,
    /// The ratio large side / small side.
    pub margin: f64,
    pub threshold: f64,
    pub strict: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub temperature: f64,
    pub pulse_duration: f64,
    pub most_probable_speed: f64,
    pub mean_thermal_speed: f64,
    pub doppler_width: f64,
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn ratio(large: f64, small: f64) -> f64 {
    if small == 0.0 {
        f64::INFINITY
    } else {
        large / small
    }
}

/// Evaluates the validity inequalities. Failures are reported, not raised.
pub fn validate_regime(
    config: &SchemeConfig,
    temperature: f64,
    pulse_duration: f64,
    thresholds: &RegimeThresholds,
) -> RegimeReport {
    let (u, vbar) = thermal_speeds(&config.atom, temperature, &config.constants);
    let doppler = config.wavenumber * vbar;
    let dd = config.zeeman.delta_d.abs();
    let od = config.rabi_drive.norm();
    let probe = config.rabi_a.norm().max(config.rabi_b.norm());
    let gamma = config.atom.gamma;
    let mg = thresholds.much_greater;
    let mut checks = Vec::new();
    let mut push = |name: &str, description: &str, margin: f64, threshold: f64, strict: bool| {
        let passed = if strict {
            margin > threshold
        } else {
            margin >= threshold
        };
        checks.push(RegimeCheck {
            name: name.into(),
            description: description.into(),
            margin,
            threshold,
            strict,
            passed,
        });
    };
    push(
        "splitting_over_drive",
        "|Δ_D| ≫ |Ω_d|",
        ratio(dd, od),
        mg,
        false,
    );
    push(
        "splitting_over_probe",
        "|Δ_D| ≫ |Ω_a,b|",
        ratio(dd, probe),
        mg,
        false,
    );
    push(
        "splitting_over_doppler",
        "|Δ_D| > k v̄",
        ratio(dd, doppler),
        1.0,
        true,
    );
    push(
        "gamma_over_probe",
        "γ ≫ |Ω_a,b|",
        ratio(gamma, probe),
        mg,
        false,
    );
    push(
        "drive_over_probe",
        "|Ω_d| ≫ |Ω_a,b|",
        ratio(od, probe),
        mg,
        false,
    );
    push(
        "duration_times_gamma",
        "τγ ≫ 1",
        pulse_duration * gamma,
        mg,
        false,
    );
    push(
        "window_over_bandwidth",
        "pulse bandwidth 1/τ inside the transparency window |Ω_d|²/γ",
        config.transparency_window() * pulse_duration,
        1.0,
        true,
    );
    RegimeReport {
        temperature,
        pulse_duration,
        most_probable_speed: u,
        mean_thermal_speed: vbar,
        doppler_width: doppler,
        checks,
    }
}

pub mod presets {
    //! The ⁸⁷Rb D1 worked example.

    use super::*;
    use std::f64::consts::TAU;

    /// Everything the rb87-d1 preset fixes, before it is turned into configs.
    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct Preset {
        pub name: String,
        pub atom: AtomSpec,
        pub b_field: f64,
        pub rabi_drive: f64,
        pub rabi_probe: f64,
        pub temperature: f64,
        pub pulse_duration: f64,
        pub beam_area: f64,
        pub length: f64,
        pub oscillator_strength: f64,
    }

    /// 5S1/2 F=1 → 5P1/2 F'=1 of ⁸⁷Rb.
    ///
    /// ω₀ = 2π·3.775e14 rad/s, g_L = -1/2, g_U = -1/6, N = 1e14 cm⁻³,
    /// |Ω_d| = 5e6 rad/s and Δ_D = 70γ with Δ_L = 2π·3e8, Δ_U = 2π·1e8 rad/s.
    /// The g factors are negative, so those positive shifts need B along -z;
    /// |B| ≈ 428.7 G ("B ≃ 430 G"). γ follows from Δ_D = 70γ. The probes sit
    /// at 1% of the drive, the weak-field value used for the response checks.
    pub fn rb87_d1() -> Preset {
        let constants = PhysicalConstants::CODATA;
        let omega0 = TAU * 3.775e14;
        let delta_d = TAU * 2.0e8;
        let oscillator_strength = 1.0;
        let atom = AtomSpec {
            omega0,
            g_lower: -0.5,
            g_upper: -1.0 / 6.0,
            gamma: delta_d / 70.0,
            mass: 86.909_180_527 * ATOMIC_MASS_UNIT,
            sigma0: resonant_cross_section(omega0, oscillator_strength, &constants),
            density: 1.0e20,
        };
        let b_field = field_for_splitting(&atom, delta_d, &constants).expect("distinct g factors");
        Preset {
            name: "rb87-d1".into(),
            atom,
            b_field,
            rabi_drive: 5.0e6,
            rabi_probe: 5.0e4,
            temperature: 10.0,
            pulse_duration: 1.0e-6,
            beam_area: 1.0e-12,
            length: 0.038,
            oscillator_strength,
        }
    }

    impl Preset {
        /// Unfolded config with the preset's fields applied.
        pub fn config(&self, scheme: Scheme, geometry: Geometry) -> Result<SchemeConfig> {
            let constants = PhysicalConstants::CODATA;
            let zeeman = zeeman_shifts(&self.atom, self.b_field, &constants)?;
            let p = Complex64::new(self.rabi_probe, 0.0);
            Ok(
                SchemeConfig::new(scheme, geometry, self.atom, zeeman, constants)?
                    .with_drive(Complex64::new(self.rabi_drive, 0.0))
                    .with_probes(p, p),
            )
        }

        pub fn cross_phase(&self) -> SchemeConfig {
            self.config(Scheme::CrossPhase, Geometry::CollinearDopplerFree)
                .expect("preset is valid")
        }

        pub fn cross_absorption(&self) -> SchemeConfig {
            self.config(Scheme::CrossAbsorption, Geometry::PerpendicularColdGas)
                .expect("preset is valid")
        }
    }

    pub fn by_name(name: &str) -> Option<Preset> {
        match name {
            "rb87-d1" => Some(rb87_d1()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::rb87_d1;
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn rb() -> AtomSpec {
        rb87_d1().atom
    }

    #[test]
    fn zero_field_gives_zero_shifts() {
        let z = zeeman_shifts(&rb(), 0.0, &PhysicalConstants::CODATA).unwrap();
        assert_eq!((z.delta_lower, z.delta_upper, z.delta_d), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rb87_shifts_near_430_gauss() {
        let z = zeeman_shifts(&rb(), 0.043, &PhysicalConstants::CODATA).unwrap();
        assert!((z.delta_lower.abs() / (TAU * 3e8) - 1.0).abs() < 0.01);
        assert!((z.delta_upper.abs() / (TAU * 1e8) - 1.0).abs() < 0.01);
        // Quoted shifts are magnitudes; both g factors are negative.
        assert!(z.delta_lower < 0.0 && z.delta_upper < 0.0);
    }

    #[test]
    fn preset_field_reproduces_quoted_shifts() {
        let p = rb87_d1();
        let z = zeeman_shifts(&p.atom, p.b_field, &PhysicalConstants::CODATA).unwrap();
        assert!((z.delta_lower / (TAU * 3e8) - 1.0).abs() < 1e-12);
        assert!((z.delta_upper / (TAU * 1e8) - 1.0).abs() < 1e-12);
        assert!((z.delta_d / (70.0 * p.atom.gamma) - 1.0).abs() < 1e-12);
        assert!((p.b_field.abs() - 0.04287).abs() < 1e-4);
        assert!((p.atom.gamma - 1.795e7).abs() < 1e4);
    }

    #[test]
    fn equal_g_factors_give_no_splitting() {
        let mut a = rb();
        a.g_upper = a.g_lower;
        let z = zeeman_shifts(&a, 0.05, &PhysicalConstants::CODATA).unwrap();
        assert_eq!(z.delta_d, 0.0);
    }

    #[test]
    fn non_finite_field_rejected() {
        assert!(matches!(
            zeeman_shifts(&rb(), f64::NAN, &PhysicalConstants::CODATA),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn constants_override_rejects_nonpositive() {
        assert!(PhysicalConstants::with_override(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PhysicalConstants::with_override(1.0, 2.0, 3.0, 4.0, 5.0).is_ok());
    }

    #[test]
    fn wavenumber_invariant() {
        let c = rb87_d1().cross_phase();
        assert_eq!(
            c.wavenumber(),
            c.atom().omega0 / c.constants().light_speed()
        );
    }

    #[test]
    fn alpha0_and_cross_section() {
        let a = rb();
        // λ ≈ 794 nm, σ₀ = 3λ²/2π ≈ 3.0e-13 m²
        assert!((a.sigma0 - 3.01e-13).abs() < 0.02e-13);
        assert!((a.alpha0() - 3.016e7).abs() < 0.02e7);
    }

    #[test]
    fn collinear_cross_absorption_rejected() {
        let p = rb87_d1();
        let err = p
            .config(Scheme::CrossAbsorption, Geometry::CollinearDopplerFree)
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn cross_phase_stark_values() {
        let z = ZeemanSplitting {
            b_field: 0.0,
            delta_lower: 0.0,
            delta_upper: 0.0,
            delta_d: TAU * 2e8,
        };
        let c = SchemeConfig::new(
            Scheme::CrossPhase,
            Geometry::CollinearDopplerFree,
            rb(),
            z,
            PhysicalConstants::CODATA,
        )
        .unwrap()
        .with_drive(Complex64::new(5e6, 0.0));
        let (s, folded) = stark_shifts(&c).unwrap();
        assert!((s.state1 + 9.947e3).abs() < 1.0, "{}", s.state1);
        assert_eq!(s.state3, -s.state1);
        assert!(folded.stark_incorporated());
        assert!(!c.stark_incorporated());
        assert!((folded.effective_delta_d() - (TAU * 2e8 + 9.947e3)).abs() < 1.0);
    }

    #[test]
    fn cross_absorption_stark_magnitudes() {
        let z = ZeemanSplitting {
            b_field: 0.0,
            delta_lower: 0.0,
            delta_upper: 0.0,
            delta_d: TAU * 2e8,
        };
        let c = SchemeConfig::new(
            Scheme::CrossAbsorption,
            Geometry::PerpendicularColdGas,
            rb(),
            z,
            PhysicalConstants::CODATA,
        )
        .unwrap()
        .with_drive(Complex64::new(5e6, 0.0));
        let (s, folded) = stark_shifts(&c).unwrap();
        assert!((s.state1 + 6.631e3).abs() < 1.0, "{}", s.state1);
        assert!((s.state3 - 1.989e4).abs() < 5.0, "{}", s.state3);
        assert_eq!(folded.effective_delta_d(), TAU * 2e8);
    }

    #[test]
    fn stark_without_drive_and_singular_splitting() {
        let c = rb87_d1().cross_phase().with_drive(Complex64::new(0.0, 0.0));
        let (s, _) = stark_shifts(&c).unwrap();
        assert_eq!(s, StarkShifts::default());
        let mut z = *c.zeeman();
        z.delta_d = 0.0;
        let c = c.with_drive(Complex64::new(1e6, 0.0)).with_zeeman(z);
        assert!(matches!(stark_shifts(&c), Err(Error::Singular(_))));
    }

    #[test]
    fn builders_clear_stale_stark() {
        let c = rb87_d1().cross_phase().folded().unwrap();
        assert!(c.stark_incorporated());
        assert!(!c
            .clone()
            .with_drive(Complex64::new(1e6, 0.0))
            .stark_incorporated());
        assert!(c
            .with_probes(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
            .stark_incorporated());
    }

    #[test]
    fn preset_regime_passes() {
        let p = rb87_d1();
        let r = validate_regime(&p.cross_phase(), 10.0, 1e-6, &RegimeThresholds::default());
        assert!(r.all_passed(), "{r:#?}");
        let m = r.check("splitting_over_drive").unwrap().margin;
        assert!((m - 251.3).abs() < 0.5, "{m}");
        assert!((r.doppler_width - 4.24e8).abs() < 0.02e8);
    }

    #[test]
    fn doppler_boundary_fails_with_unit_margin() {
        let p = rb87_d1();
        let c = p.cross_phase();
        // k v̄ = |Δ_D|  ⇒  T = m (Δ_D/k)² / 3k_B
        let v = c.zeeman().delta_d.abs() / c.wavenumber();
        let t = p.atom.mass * v * v / (3.0 * c.constants().boltzmann());
        let r = validate_regime(&c, t, 1e-6, &RegimeThresholds::default());
        let d = r.check("splitting_over_doppler").unwrap();
        assert!((d.margin - 1.0).abs() < 1e-12);
        assert!(!d.passed);
    }

    #[test]
    fn no_probes_pass_weak_field_checks() {
        let c = rb87_d1()
            .cross_phase()
            .with_probes(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let r = validate_regime(&c, 10.0, 1e-6, &RegimeThresholds::default());
        for name in [
            "gamma_over_probe",
            "drive_over_probe",
            "splitting_over_probe",
        ] {
            assert!(r.check(name).unwrap().passed);
        }
    }

    #[test]
    fn thermal_speed_ratio() {
        let (u, v) = thermal_speeds(&rb(), 10.0, &PhysicalConstants::CODATA);
        assert!((v / u - 1.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn probe_swap_is_an_involution() {
        let c = rb87_d1()
            .cross_phase()
            .with_probes(Complex64::new(1.0, 2.0), Complex64::new(3.0, -1.0))
            .with_detunings(5.0, -7.0)
            .folded()
            .unwrap();
        assert_eq!(c.probe_swapped().probe_swapped(), c);
        assert_eq!(
            c.probe_swapped().effective_delta_d(),
            -c.effective_delta_d()
        );
        let fresh = c.probe_swapped().folded().unwrap();
        assert_eq!(fresh.stark(), c.probe_swapped().stark());
    }

    proptest! {
        #[test]
        fn zeeman_is_linear_and_odd(b in -1.0f64..1.0, gl in -2.0f64..2.0, gu in -2.0f64..2.0) {
            let mut a = rb();
            a.g_lower = gl;
            a.g_upper = gu;
            let k = PhysicalConstants::CODATA;
            let z1 = zeeman_shifts(&a, b, &k).unwrap();
            let z2 = zeeman_shifts(&a, 2.0 * b, &k).unwrap();
            let zm = zeeman_shifts(&a, -b, &k).unwrap();
            let tol = 1e-6 * (1.0 + z1.delta_lower.abs() + z1.delta_upper.abs());
            prop_assert!((z2.delta_d - 2.0 * z1.delta_d).abs() <= tol);
            prop_assert!((z2.delta_lower - 2.0 * z1.delta_lower).abs() <= tol);
            prop_assert!((zm.delta_d + z1.delta_d).abs() <= tol);
            prop_assert_eq!(z1.delta_d, z1.delta_lower - z1.delta_upper);
            let mut swapped = a;
            swapped.g_lower = gu;
            swapped.g_upper = gl;
            let zs = zeeman_shifts(&swapped, b, &k).unwrap();
            prop_assert!((zs.delta_d + z1.delta_d).abs() <= tol);
        }

        #[test]
        fn stark_scaling(od in 1e5f64..1e7, dd in 1e8f64..1e10, cross_abs in any::<bool>()) {
            let (scheme, geometry) = if cross_abs {
                (Scheme::CrossAbsorption, Geometry::PerpendicularColdGas)
            } else {
                (Scheme::CrossPhase, Geometry::CollinearDopplerFree)
            };
            let z = ZeemanSplitting { b_field: 0.0, delta_lower: 0.0, delta_upper: 0.0, delta_d: dd };
            let base = SchemeConfig::new(scheme, geometry, rb(), z, PhysicalConstants::CODATA).unwrap();
            let s1 = stark_shifts(&base.clone().with_drive(Complex64::new(od, 0.0))).unwrap().0;
            let s2 = stark_shifts(&base.clone().with_drive(Complex64::new(2.0 * od, 0.0))).unwrap().0;
            let z2 = ZeemanSplitting { delta_d: 2.0 * dd, ..z };
            let s3 = stark_shifts(&base.with_zeeman(z2).with_drive(Complex64::new(od, 0.0))).unwrap().0;
            prop_assert!((s2.state1 / s1.state1 - 4.0).abs() < 1e-12);
            prop_assert!((s2.state3 / s1.state3 - 4.0).abs() < 1e-12);
            prop_assert!((s3.state1 / s1.state1 - 0.5).abs() < 1e-12);
        }
    }
}
