//! Cross-module invariants checked on randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use zeeman_xpm::atom::presets::rb87_d1;
use zeeman_xpm::dynamics::VelocityClass;
use zeeman_xpm::propagation::{propagate, Envelope, PropagationGrid, PropagationMode, PulseSpec};
use zeeman_xpm::response::{polarizability_analytic, polarizability_numeric};
use zeeman_xpm::scenario;
use zeeman_xpm::validation::probe_swap_trajectory_error;

fn config(oa: f64, ob: f64) -> zeeman_xpm::atom::SchemeConfig {
    rb87_d1()
        .cross_phase()
        .with_probes(oa.into(), ob.into())
        .folded()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn probe_swap_exchanges_numeric_alphas(oa in 1e3f64..2e5, ob in 1e3f64..2e5, da in -2e5f64..2e5) {
        let c = config(oa, ob).with_detunings(da, 0.0);
        let n = polarizability_numeric(&c, &VelocityClass::at_rest()).unwrap();
        let m = polarizability_numeric(&c.probe_swapped(), &VelocityClass::at_rest()).unwrap();
        let (x, y) = (n.alpha_a.value(), m.alpha_b.value());
        prop_assert!((x - y).norm() <= 1e-8 * x.norm().max(1e-6));
        let (x, y) = (n.alpha_b.value(), m.alpha_a.value());
        prop_assert!((x - y).norm() <= 1e-8 * x.norm().max(1e-6));
    }

    #[test]
    fn medium_is_passive(oa in 1e3f64..2e5, ob in 1e3f64..2e5, da in -1e6f64..1e6, db in -1e6f64..1e6) {
        let c = config(oa, ob).with_detunings(da, db);
        let n = polarizability_numeric(&c, &VelocityClass::at_rest()).unwrap();
        prop_assert!(n.alpha_a.value().im >= 0.0);
        prop_assert!(n.alpha_b.value().im >= 0.0);
    }

    #[test]
    fn analytic_ratio_identity_holds(scale in 0.2f64..5.0, drive in 1e6f64..2e7) {
        let p = rb87_d1();
        let mut z = *p.cross_phase().zeeman();
        z.delta_d *= scale;
        let c = p.cross_phase().with_zeeman(z).with_drive(drive.into()).folded().unwrap();
        let a = polarizability_analytic(&c).unwrap().alpha_a.value();
        let want = c.effective_delta_d() / c.atom().gamma;
        prop_assert!((a.re / a.im - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn trajectory_symmetry_under_probe_swap(oa in 1e4f64..5e5, ob in 1e4f64..5e5) {
        prop_assert!(probe_swap_trajectory_error(&config(oa, ob), None).unwrap() <= 1e-9);
    }

    #[test]
    fn absorption_grows_with_length(omega in 1e4f64..8e4) {
        let p = rb87_d1();
        let c = config(omega, omega);
        let pulse = PulseSpec::new(Envelope::Gaussian, p.pulse_duration, omega.into(), p.beam_area);
        let run = |l: f64| {
            let grid = PropagationGrid { samples: 129, ..PropagationGrid::for_pulse(&pulse, l, 2e-4) };
            propagate(&c, &pulse, &pulse, &grid, PropagationMode::AnalyticAlpha).unwrap()
        };
        let (short, long) = (run(0.01), run(0.03));
        prop_assert!(long.absorption_a >= short.absorption_a);
        prop_assert!((0.0..=1.0).contains(&long.absorption_a));
    }
}

#[test]
fn constant_envelope_absorption_matches_exponential() {
    let p = rb87_d1();
    let c = config(5e4, 5e4);
    let pulse = PulseSpec::new(Envelope::FlatTop, p.pulse_duration, 5e4.into(), p.beam_area);
    let alpha = Complex64::new(40.0, 2.0);
    let grid = PropagationGrid::for_pulse(&pulse, 0.02, 1e-4);
    let r = propagate(
        &c,
        &pulse,
        &pulse,
        &grid,
        PropagationMode::Constant {
            alpha_a: alpha,
            alpha_b: alpha,
        },
    )
    .unwrap();
    let want = 1.0 - (-2.0 * alpha.im * 0.02).exp();
    assert!((r.absorption_a - want).abs() <= 1e-6 * want);
}

#[test]
fn scenario_file_drives_the_steady_pipeline() {
    let s = scenario::parse("preset = rb87-d1\nrabi_b = 0\n").unwrap();
    let c = s.config().unwrap().folded().unwrap();
    let r = polarizability_numeric(&c, &VelocityClass::at_rest()).unwrap();
    assert_eq!(r.alpha_a.value(), Complex64::new(0.0, 0.0));
    assert!(!r.alpha_b.is_present());
}
