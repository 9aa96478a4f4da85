//! Time integration of the amplitude equations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AmplitudeModel, AmplitudeState};
use crate::error::{Error, Result};
use crate::numeric::ode::{Dopri5, Dopri5Options, Stats};
use crate::Integrator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<AmplitudeState>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &AmplitudeState {
        self.states
            .last()
            .expect("trajectory has at least the initial sample")
    }

    /// Mean of `f` over the samples with time in `[t_start, t_end]`, by the
    /// trapezoid rule on the (possibly non-uniform) sample times.
    pub fn time_average<F: Fn(&AmplitudeState) -> Complex64>(
        &self,
        t_start: f64,
        t_end: f64,
        f: F,
    ) -> Complex64 {
        let pts: Vec<&AmplitudeState> = self
            .states
            .iter()
            .filter(|s| s.time >= t_start && s.time <= t_end)
            .collect();
        if pts.len() < 2 {
            return pts.first().map(|s| f(s)).unwrap_or_default();
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for w in pts.windows(2) {
            acc += (f(w[0]) + f(w[1])) * (0.5 * (w[1].time - w[0].time));
        }
        acc / (pts[pts.len() - 1].time - pts[0].time)
    }
}

fn integrator(tolerance: f64) -> Integrator {
    Dopri5::new(Dopri5Options {
        rtol: tolerance,
        atol: tolerance * 1e-3,
        ..Dopri5Options::default()
    })
}

/// Integrates from `initial.time` and samples at `sample_times`.
///
/// `tolerance` is the relative local error bound (absolute bound is 1e-3 of it).
pub fn integrate(
    model: &AmplitudeModel,
    initial: &AmplitudeState,
    sample_times: &[f64],
    tolerance: f64,
) -> Result<Trajectory> {
    if !(tolerance > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    if initial.norm_sqr() > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!(
            "initial state norm {} exceeds 1",
            initial.norm_sqr()
        )));
    }
    match sample_times.last() {
        Some(&t) if t > initial.time => {}
        _ => {
            return Err(Error::Precondition(
                "t_end must be later than the initial time".into(),
            ))
        }
    }
    let mut states = Vec::with_capacity(sample_times.len());
    let Stats {
        accepted, rejected, ..
    } = integrator(tolerance).integrate_with(
        model,
        initial.time,
        &initial.amplitudes,
        sample_times,
        |t, y| {
            let mut a = [Complex64::new(0.0, 0.0); 6];
            a.copy_from_slice(y);
            states.push(AmplitudeState::new(a, t));
        },
    )?;
    Ok(Trajectory {
        states,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// `n + 1` equally spaced samples from `initial.time` to `t_end`.
pub fn integrate_uniform(
    model: &AmplitudeModel,
    initial: &AmplitudeState,
    t_end: f64,
    samples: usize,
    tolerance: f64,
) -> Result<Trajectory> {
    let n = samples.max(1);
    let t0 = initial.time;
    let times: Vec<f64> = (0..=n)
        .map(|k| t0 + (t_end - t0) * k as f64 / n as f64)
        .collect();
    integrate(model, initial, &times, tolerance)
}

/// Least-squares slope of the unwrapped phase of state `index` (0-based).
pub fn phase_rate(trajectory: &Trajectory, index: usize) -> f64 {
    let mut unwrapped = Vec::with_capacity(trajectory.states.len());
    let mut prev = 0.0;
    let mut offset = 0.0;
    for (k, s) in trajectory.states.iter().enumerate() {
        let arg = s.amplitudes[index].arg();
        if k > 0 {
            let mut d = arg - prev;
            while d > std::f64::consts::PI {
                d -= std::f64::consts::TAU;
                offset -= std::f64::consts::TAU;
            }
            while d < -std::f64::consts::PI {
                d += std::f64::consts::TAU;
                offset += std::f64::consts::TAU;
            }
        }
        prev = arg;
        unwrapped.push((s.time, arg + offset));
    }
    let n = unwrapped.len() as f64;
    let (st, sp) = unwrapped
        .iter()
        .fold((0.0, 0.0), |(a, b), (t, p)| (a + t, b + p));
    let (mt, mp) = (st / n, sp / n);
    let (num, den) = unwrapped.iter().fold((0.0, 0.0), |(a, b), (t, p)| {
        (a + (t - mt) * (p - mp), b + (t - mt) * (t - mt))
    });
    num / den
}
