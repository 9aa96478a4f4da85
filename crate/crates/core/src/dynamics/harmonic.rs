//! Periodic weak-probe steady state by harmonic balance.
//!
//! With A₂ pinned to 1 the remaining five amplitudes obey a linear system
//! with periodic coefficients. Writing `A_s(t) = Σ_m c_{s,m} e^{imωt}` for
//! `|m| ≤ M` turns it into a dense linear algebraic system in the `c`s.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AmplitudeModel, Field};
use crate::error::{Error, Result};

const PINNED: usize = 1;
const UNKNOWN: [usize; 5] = [0, 2, 3, 4, 5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSolution {
    /// Fundamental angular frequency ω of the expansion.
    pub base_frequency: f64,
    pub order: usize,
    /// `coefficients[s][m + M]` is `c_{s,m}`; state index is 0-based.
    pub coefficients: Vec<Vec<Complex64>>,
    /// ‖A x - b‖ / ‖b‖ of the algebraic system.
    pub residual: f64,
}

impl HarmonicSolution {
    pub fn coefficient(&self, state: usize, m: i64) -> Complex64 {
        let m_max = self.order as i64;
        if m.abs() > m_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients[state][(m + m_max) as usize]
    }

    /// Reconstructed amplitude of `state` at time `t`.
    pub fn evaluate(&self, state: usize, t: f64) -> Complex64 {
        let m_max = self.order as i64;
        (-m_max..=m_max)
            .map(|m| {
                self.coefficient(state, m)
                    * Complex64::from_polar(1.0, m as f64 * self.base_frequency * t)
            })
            .sum()
    }

    /// DC part of `conj(A_lower) A_upper e^{-iθt}` with θ = `shift`·ω.
    pub fn dc_product(&self, lower: usize, upper: usize, shift: i64) -> Complex64 {
        let m_max = self.order as i64;
        (-m_max..=m_max)
            .map(|m| self.coefficient(lower, m).conj() * self.coefficient(upper, m + shift))
            .sum()
    }

    /// Harmonic index of a phase rate in units of the base frequency.
    pub fn harmonic_of(&self, phase_rate: f64) -> i64 {
        if self.base_frequency == 0.0 {
            0
        } else {
            (phase_rate / self.base_frequency).round() as i64
        }
    }

    /// Sum over the couplings of `field` of `sign · ⟨A_lower* A_upper e^{-iθt}⟩_DC`.
    pub fn field_coherence(&self, model: &AmplitudeModel, field: Field) -> Complex64 {
        model
            .couplings()
            .iter()
            .filter(|c| c.field == field)
            .map(|c| self.dc_product(c.lower, c.upper, self.harmonic_of(c.phase_rate)) * c.sign)
            .sum()
    }

    /// Largest |c_{s,±m}| over the unknown states, for m = 0..=M.
    pub fn harmonic_magnitudes(&self) -> Vec<f64> {
        (0..=self.order as i64)
            .map(|m| {
                UNKNOWN
                    .iter()
                    .map(|&s| {
                        self.coefficient(s, m)
                            .norm()
                            .max(self.coefficient(s, -m).norm())
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Smallest ω such that every active phase rate is an integer multiple of it.
pub fn base_frequency(model: &AmplitudeModel) -> Result<f64> {
    let rates: Vec<f64> = model
        .couplings()
        .iter()
        .filter(|c| model.rabi(c.field).norm() > 0.0 && c.phase_rate != 0.0)
        .map(|c| c.phase_rate.abs())
        .collect();
    let Some(min) = rates.iter().copied().reduce(f64::min) else {
        return Ok(0.0);
    };
    for q in 1..=64 {
        let w = min / q as f64;
        if rates.iter().all(|r| {
            let k = r / w;
            (k - k.round()).abs() <= 1e-9 * k.max(1.0)
        }) {
            return Ok(w);
        }
    }
    Err(Error::Precondition(format!(
        "phase rates {rates:?} are not commensurate; the steady state is not periodic"
    )))
}

/// Solves for the periodic steady state with truncation order `order`.
pub fn steady_state_harmonic(model: &AmplitudeModel, order: usize) -> Result<HarmonicSolution> {
    if order < 2 {
        return Err(Error::Precondition(format!(
            "harmonic order must be at least 2, got {order}"
        )));
    }
    let omega = base_frequency(model)?;
    let m_max = order as i64;
    let h = 2 * order + 1;
    let n = UNKNOWN.len() * h;
    let pos = |s: usize| UNKNOWN.iter().position(|&u| u == s).expect("unknown state");
    let col = |s: usize, m: i64| pos(s) * h + (m + m_max) as usize;

    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DVector::<Complex64>::zeros(n);
    let det = model.detunings();
    let dec = model.decay();
    for &s in &UNKNOWN {
        for m in -m_max..=m_max {
            let r = col(s, m);
            a[(r, r)] += Complex64::new(dec[s], m as f64 * omega - det[s]);
        }
    }
    let i = Complex64::i();
    for cp in model.couplings() {
        let omega_f = model.rabi(cp.field);
        if omega_f.norm() == 0.0 {
            continue;
        }
        let w = if omega == 0.0 {
            0
        } else {
            (cp.phase_rate / omega).round() as i64
        };
        let up = i * omega_f * cp.sign;
        let down = i * omega_f.conj() * cp.sign;
        for (dst, src, amp, shift) in [(cp.upper, cp.lower, up, w), (cp.lower, cp.upper, down, -w)]
        {
            if dst == PINNED {
                continue;
            }
            for m in -m_max..=m_max {
                let ms = m - shift;
                if ms.abs() > m_max {
                    continue;
                }
                let r = col(dst, m);
                if src == PINNED {
                    if ms == 0 {
                        b[r] += amp;
                    }
                } else {
                    a[(r, col(src, ms))] -= amp;
                }
            }
        }
    }

    let lu = a.clone().lu();
    let x = lu.solve(&b).ok_or_else(|| {
        Error::Degenerate(
            "the harmonic-balance matrix is singular (undamped exact resonance?)".into(),
        )
    })?;
    if !x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Degenerate("non-finite harmonic coefficients".into()));
    }
    let bn = b.norm();
    let residual = if bn == 0.0 {
        (&a * &x).norm()
    } else {
        (&a * &x - &b).norm() / bn
    };
    if residual > 1e-8 {
        return Err(Error::Degenerate(format!(
            "ill-conditioned harmonic-balance system, residual {residual:e}"
        )));
    }

    let mut coefficients = vec![vec![Complex64::new(0.0, 0.0); h]; 6];
    coefficients[PINNED][order] = Complex64::new(1.0, 0.0);
    for &s in &UNKNOWN {
        for m in -m_max..=m_max {
            coefficients[s][(m + m_max) as usize] = x[col(s, m)];
        }
    }
    Ok(HarmonicSolution {
        base_frequency: omega,
        order,
        coefficients,
        residual,
    })
}
