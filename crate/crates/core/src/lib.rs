// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atom;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod numeric;
pub mod propagation;
pub mod response;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};

/// The amplitude integrator used by the physics layer.
pub type Integrator = numeric::ode::Dopri5<f64>;
