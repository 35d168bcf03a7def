//! Numerical laboratory for weighted Moser–Trudinger functionals.
//!
//! The core math is generic over the floating-point [`Scalar`]; the `f64`
//! aliases below are what the experiments, optimizer and CLI use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod functionals;
pub mod optimize;
pub mod profiles;
pub mod quadrature;
pub mod scalar;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Config = exponents::ExponentConfig<f64>;
pub type Profile = profiles::RadialProfile<f64>;
pub type Composed = profiles::ComposedProfile<f64>;
