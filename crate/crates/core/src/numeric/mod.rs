//! Scalar-generic numerical kernels: adaptive integration of complex ODE
//! systems, Gauss-Hermite quadrature and finite-difference derivatives.
//!
//! Everything here is written against [`Real`], so the same code runs in
//! `f32` for quick exploration and in `f64` for the physics layer.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive};

pub mod diff;
pub mod ode;
pub mod quadrature;

/// Floating point scalar accepted by the numerical kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for values the type cannot represent at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}
