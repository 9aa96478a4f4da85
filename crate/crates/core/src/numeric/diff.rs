//! Central finite differences with one Richardson extrapolation level.

use thiserror::Error;

use super::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError<E> {
    #[error("step must be positive and finite")]
    BadStep,
    #[error("non-finite derivative estimate with step {step}; the step is too small or the function is noisy")]
    NonFinite { step: f64 },
    #[error(transparent)]
    Eval(E),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative<T> {
    pub value: T,
    /// |extrapolated - fine central difference|, a cheap error estimate.
    pub error_estimate: T,
    pub step: T,
}

/// Derivative of `f` at `x`: `(4 D(h/2) - D(h)) / 3`, with `D` the central
/// difference quotient. The result is fourth-order accurate in `h`.
pub fn richardson_central<T, E, F>(mut f: F, x: T, h: T) -> Result<Derivative<T>, DiffError<E>>
where
    T: Real,
    F: FnMut(T) -> Result<T, E>,
{
    if !(h > T::zero()) || !h.is_finite() {
        return Err(DiffError::BadStep);
    }
    let two = T::lit(2.0);
    let mut central = |step: T| -> Result<T, DiffError<E>> {
        let up = f(x + step).map_err(DiffError::Eval)?;
        let down = f(x - step).map_err(DiffError::Eval)?;
        Ok((up - down) / (two * step))
    };
    let coarse = central(h)?;
    let fine = central(h / two)?;
    let value = (T::lit(4.0) * fine - coarse) / T::lit(3.0);
    if !value.is_finite() {
        return Err(DiffError::NonFinite { step: h.as_f64() });
    }
    Ok(Derivative {
        value,
        error_estimate: (value - fine).abs(),
        step: h,
    })
}
