//! Dormand-Prince 5(4) integrator for complex-valued first order systems.
//!
//! Step size is controlled with the PI controller of Hairer, Nørsett and
//! Wanner and capped so that the fastest explicit phase in the right-hand
//! side is always resolved. Values at requested sample times come from the
//! method's fourth-order continuous extension.

use num_complex::Complex;
use thiserror::Error;

use super::Real;

/// A system `dy/dt = f(t, y)` over complex amplitudes.
pub trait ComplexSystem<T: Real> {
    fn dim(&self) -> usize;

    fn rhs(&self, t: T, y: &[Complex<T>], dy: &mut [Complex<T>]);

    /// Largest angular rate that appears explicitly in `f` (detunings,
    /// modulation frequencies, couplings). Used to cap the step size.
    fn fastest_rate(&self) -> T;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error(
        "step size underflow at t = {t:e} s (h = {step:e} s); the fastest timescale of the system is {timescale:e} s, \
         the problem is stiff or the tolerance too strict"
    )]
    StepUnderflow { t: f64, step: f64, timescale: f64 },
    #[error("exceeded {max_steps} steps before reaching t = {t_end:e} s (stopped at t = {t:e} s)")]
    TooManySteps {
        t: f64,
        t_end: f64,
        max_steps: usize,
    },
    #[error("non-finite state encountered at t = {t:e} s")]
    NonFinite { t: f64 },
    #[error("invalid integration request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options<T> {
    pub rtol: T,
    pub atol: T,
    /// Lower bound on the number of steps per period of the fastest rate.
    pub steps_per_period: T,
    pub max_steps: usize,
    /// Steps below `min_step_fraction * |t_end - t0|` are reported as stiffness.
    pub min_step_fraction: T,
}

impl<T: Real> Default for Dopri5Options<T> {
    fn default() -> Self {
        Self {
            rtol: T::lit(1e-9),
            atol: T::lit(1e-12),
            steps_per_period: T::lit(4.0),
            max_steps: 50_000_000,
            min_step_fraction: T::lit(1e-15),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<Complex<T>>>,
    pub stats: Stats,
}

#[derive(Debug, Clone)]
pub struct Dopri5<T> {
    pub options: Dopri5Options<T>,
}

impl<T: Real> Default for Dopri5<T> {
    fn default() -> Self {
        Self {
            options: Dopri5Options::default(),
        }
    }
}

struct Tableau<T> {
    c: [T; 7],
    // The last row doubles as the fifth-order weights (first same as last).
    a: [[T; 6]; 7],
    e: [T; 7],
    d: [T; 7],
}

impl<T: Real> Tableau<T> {
    fn new() -> Self {
        let l = T::lit;
        let z = T::zero();
        Self {
            c: [z, l(0.2), l(0.3), l(0.8), l(8.0 / 9.0), l(1.0), l(1.0)],
            a: [
                [z, z, z, z, z, z],
                [l(0.2), z, z, z, z, z],
                [l(3.0 / 40.0), l(9.0 / 40.0), z, z, z, z],
                [l(44.0 / 45.0), l(-56.0 / 15.0), l(32.0 / 9.0), z, z, z],
                [
                    l(19372.0 / 6561.0),
                    l(-25360.0 / 2187.0),
                    l(64448.0 / 6561.0),
                    l(-212.0 / 729.0),
                    z,
                    z,
                ],
                [
                    l(9017.0 / 3168.0),
                    l(-355.0 / 33.0),
                    l(46732.0 / 5247.0),
                    l(49.0 / 176.0),
                    l(-5103.0 / 18656.0),
                    z,
                ],
                [
                    l(35.0 / 384.0),
                    z,
                    l(500.0 / 1113.0),
                    l(125.0 / 192.0),
                    l(-2187.0 / 6784.0),
                    l(11.0 / 84.0),
                ],
            ],
            e: [
                l(71.0 / 57600.0),
                z,
                l(-71.0 / 16695.0),
                l(71.0 / 1920.0),
                l(-17253.0 / 339200.0),
                l(22.0 / 525.0),
                l(-1.0 / 40.0),
            ],
            d: [
                l(-12715105075.0 / 11282082432.0),
                z,
                l(87487479700.0 / 32700410799.0),
                l(-10690763975.0 / 1880347072.0),
                l(701980252875.0 / 199316789632.0),
                l(-1453857185.0 / 822651844.0),
                l(69997945.0 / 29380423.0),
            ],
        }
    }
}

impl<T: Real> Dopri5<T> {
    pub fn new(options: Dopri5Options<T>) -> Self {
        Self { options }
    }

    pub fn with_tolerance(rtol: T, atol: T) -> Self {
        Self {
            options: Dopri5Options {
                rtol,
                atol,
                ..Dopri5Options::default()
            },
        }
    }

    /// Integrates from `t0` and returns the state at every entry of
    /// `sample_times`, which must be sorted and not earlier than `t0`.
    pub fn integrate<S: ComplexSystem<T>>(
        &self,
        system: &S,
        t0: T,
        y0: &[Complex<T>],
        sample_times: &[T],
    ) -> Result<Solution<T>, OdeError> {
        let mut times = Vec::with_capacity(sample_times.len());
        let mut states = Vec::with_capacity(sample_times.len());
        let stats = self.integrate_with(system, t0, y0, sample_times, |t, y| {
            times.push(t);
            states.push(y.to_vec());
        })?;
        Ok(Solution {
            times,
            states,
            stats,
        })
    }

    /// Like [`Dopri5::integrate`] but hands each sample to `observer`
    /// instead of storing it.
    pub fn integrate_with<S, F>(
        &self,
        system: &S,
        t0: T,
        y0: &[Complex<T>],
        sample_times: &[T],
        mut observer: F,
    ) -> Result<Stats, OdeError>
    where
        S: ComplexSystem<T>,
        F: FnMut(T, &[Complex<T>]),
    {
        let n = system.dim();
        if y0.len() != n {
            return Err(OdeError::InvalidRequest(format!(
                "initial state has {} entries, system has {n}",
                y0.len()
            )));
        }
        let opts = &self.options;
        if !(opts.rtol > T::zero()) || !(opts.atol >= T::zero()) {
            return Err(OdeError::InvalidRequest(
                "tolerances must be positive".into(),
            ));
        }
        if sample_times.windows(2).any(|w| w[1] < w[0])
            || sample_times.first().is_some_and(|&s| s < t0)
        {
            return Err(OdeError::InvalidRequest(
                "sample times must be sorted and >= t0".into(),
            ));
        }
        let mut stats = Stats::default();
        let Some(&t_end) = sample_times.last() else {
            return Ok(stats);
        };

        let tab = Tableau::<T>::new();
        let rate = system.fastest_rate().abs();
        let span = (t_end - t0).abs();
        let h_max = if rate > T::zero() {
            T::TAU() / (rate * opts.steps_per_period)
        } else {
            span.max(T::one())
        };
        let h_min = opts.min_step_fraction * span.max(T::min_positive_value());
        let timescale = if rate > T::zero() {
            T::one() / rate
        } else {
            T::infinity()
        };

        let mut k: Vec<Vec<Complex<T>>> = vec![vec![Complex::new(T::zero(), T::zero()); n]; 7];
        let mut y = y0.to_vec();
        let mut y_new = vec![Complex::new(T::zero(), T::zero()); n];
        let mut y_stage = y.clone();
        let mut err = vec![Complex::new(T::zero(), T::zero()); n];
        let mut dense: [Vec<Complex<T>>; 5] =
            std::array::from_fn(|_| vec![Complex::new(T::zero(), T::zero()); n]);

        let mut t = t0;
        let mut next_sample = 0;
        while next_sample < sample_times.len() && sample_times[next_sample] <= t0 {
            observer(t0, &y);
            next_sample += 1;
        }
        if next_sample == sample_times.len() {
            return Ok(stats);
        }

        system.rhs(t, &y, &mut k[0]);
        stats.evaluations += 1;
        let mut h = h_max.min(span / T::lit(100.0)).max(h_min * T::lit(10.0));
        let beta = T::lit(0.04);
        let expo1 = T::lit(0.2) - beta * T::lit(0.75);
        let safe = T::lit(0.9);
        let fac_min = T::lit(0.2);
        let fac_max = T::lit(10.0);
        let mut err_old = T::lit(1e-4);
        let mut last_rejected = false;

        loop {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(OdeError::TooManySteps {
                    t: t.as_f64(),
                    t_end: t_end.as_f64(),
                    max_steps: opts.max_steps,
                });
            }
            if h < h_min {
                return Err(OdeError::StepUnderflow {
                    t: t.as_f64(),
                    step: h.as_f64(),
                    timescale: timescale.as_f64(),
                });
            }
            let mut last = false;
            if t + h >= t_end {
                h = t_end - t;
                last = true;
            }

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = tab.a[s][j];
                        if a != T::zero() {
                            acc = acc + kj[i] * (a * h);
                        }
                    }
                    y_stage[i] = acc;
                }
                system.rhs(t + tab.c[s] * h, &y_stage, &mut k[s]);
                stats.evaluations += 1;
            }
            // Stage 7 is evaluated at y_new (first-same-as-last), so y_stage already holds it.
            y_new.copy_from_slice(&y_stage);

            let mut sum = T::zero();
            for i in 0..n {
                let mut e = Complex::new(T::zero(), T::zero());
                for (s, ks) in k.iter().enumerate() {
                    if tab.e[s] != T::zero() {
                        e = e + ks[i] * (tab.e[s] * h);
                    }
                }
                err[i] = e;
                let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                let r = e.norm() / scale;
                sum = sum + r * r;
            }
            let err_norm = (sum / T::from_usize(n.max(1)).unwrap()).sqrt();
            if !err_norm.is_finite() {
                if !y_new.iter().all(|c| c.re.is_finite() && c.im.is_finite())
                    && h <= h_min * T::lit(10.0)
                {
                    return Err(OdeError::NonFinite { t: t.as_f64() });
                }
                h = h * fac_min;
                last_rejected = true;
                stats.rejected += 1;
                continue;
            }

            let fac11 = err_norm.powf(expo1);
            if err_norm <= T::one() {
                // Continuous extension coefficients for sampling inside [t, t + h].
                for i in 0..n {
                    let dy = y_new[i] - y[i];
                    let bspl = k[0][i] * h - dy;
                    dense[0][i] = y[i];
                    dense[1][i] = dy;
                    dense[2][i] = bspl;
                    dense[3][i] = dy - k[6][i] * h - bspl;
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (s, ks) in k.iter().enumerate() {
                        if tab.d[s] != T::zero() {
                            acc = acc + ks[i] * tab.d[s];
                        }
                    }
                    dense[4][i] = acc * h;
                }
                let t_new = t + h;
                while next_sample < sample_times.len()
                    && (sample_times[next_sample] <= t_new || last)
                {
                    let ts = sample_times[next_sample];
                    let theta = if h > T::zero() {
                        (ts - t) / h
                    } else {
                        T::one()
                    };
                    let theta1 = T::one() - theta;
                    let out: Vec<Complex<T>> = (0..n)
                        .map(|i| {
                            dense[0][i]
                                + (dense[1][i]
                                    + (dense[2][i] + (dense[3][i] + dense[4][i] * theta1) * theta)
                                        * theta1)
                                    * theta
                        })
                        .collect();
                    observer(ts, &out);
                    next_sample += 1;
                }
                stats.accepted += 1;
                std::mem::swap(&mut y, &mut y_new);
                let last_k = k.pop().unwrap();
                k.insert(0, last_k);
                t = t_new;
                if last || next_sample >= sample_times.len() {
                    return Ok(stats);
                }

                let mut fac = fac11 / err_old.powf(beta);
                fac = (T::one() / fac_max).max((T::one() / fac_min).min(fac / safe));
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                err_old = err_norm.max(T::lit(1e-4));
                h = h_new.min(h_max);
                last_rejected = false;
            } else {
                let h_new = h / (T::one() / fac_min).min(fac11 / safe);
                h = h_new;
                last_rejected = true;
                stats.rejected += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rotor<T> {
        omega: T,
    }

    impl<T: Real> ComplexSystem<T> for Rotor<T> {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: T, y: &[Complex<T>], dy: &mut [Complex<T>]) {
            dy[0] = y[0] * Complex::new(T::zero(), self.omega);
        }
        fn fastest_rate(&self) -> T {
            self.omega
        }
    }

    /// y'' = -y written as a complex first-order pair.
    struct Oscillator;

    impl ComplexSystem<f64> for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[Complex<f64>], dy: &mut [Complex<f64>]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
        fn fastest_rate(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn rotor_matches_exponential() {
        let sys = Rotor { omega: 3.0_f64 };
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let sol = Dopri5::with_tolerance(1e-11, 1e-14)
            .integrate(&sys, 0.0, &[Complex::new(1.0, 0.0)], &times)
            .unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            let exact = Complex::new(0.0, 3.0 * t).exp();
            assert!(
                (y[0] - exact).norm() < 1e-8,
                "t={t} err={}",
                (y[0] - exact).norm()
            );
        }
    }

    #[test]
    fn dense_output_is_fourth_order_accurate() {
        let times: Vec<f64> = (0..=997).map(|i| i as f64 * 0.01).collect();
        let sol = Dopri5::with_tolerance(1e-10, 1e-13)
            .integrate(
                &Oscillator,
                0.0,
                &[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
                &times,
            )
            .unwrap();
        let worst = sol
            .times
            .iter()
            .zip(&sol.states)
            .map(|(t, y)| (y[0].re - t.cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn runs_in_single_precision() {
        let sys = Rotor { omega: 1.0_f32 };
        let sol = Dopri5::<f32>::with_tolerance(1e-5, 1e-7)
            .integrate(&sys, 0.0, &[Complex::new(1.0, 0.0)], &[1.0])
            .unwrap();
        let exact = Complex::new(0.0f32, 1.0).exp();
        assert!((sol.states[0][0] - exact).norm() < 1e-4);
    }

    #[test]
    fn step_cap_follows_fastest_rate() {
        let sys = Rotor { omega: 1e6_f64 };
        let sol = Dopri5::with_tolerance(1e-3, 1e-6)
            .integrate(&sys, 0.0, &[Complex::new(1.0, 0.0)], &[1e-3])
            .unwrap();
        // 1e-3 s at 1e6 rad/s is ~159 periods, at least four steps each.
        assert!(sol.stats.accepted >= 4 * 159);
    }

    #[test]
    fn rejects_unsorted_samples() {
        let sys = Rotor { omega: 1.0_f64 };
        let err = Dopri5::default()
            .integrate(&sys, 0.0, &[Complex::new(1.0, 0.0)], &[1.0, 0.5])
            .unwrap_err();
        assert!(matches!(err, OdeError::InvalidRequest(_)));
    }

    #[test]
    fn reports_step_underflow_with_timescale() {
        struct Blowup;
        impl ComplexSystem<f64> for Blowup {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, y: &[Complex<f64>], dy: &mut [Complex<f64>]) {
                dy[0] = y[0] * y[0] * 1e3;
            }
            fn fastest_rate(&self) -> f64 {
                1e3
            }
        }
        let opts = Dopri5Options {
            min_step_fraction: 1e-9,
            ..Dopri5Options::default()
        };
        let err = Dopri5::new(opts)
            .integrate(&Blowup, 0.0, &[Complex::new(1.0, 0.0)], &[1.0])
            .unwrap_err();
        match err {
            OdeError::StepUnderflow { timescale, .. } => assert!((timescale - 1e-3).abs() < 1e-12),
            OdeError::NonFinite { .. } => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
