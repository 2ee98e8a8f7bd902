//! Numerical laboratory for weak wave turbulence: collision coefficients,
//! kinetic and moment equations, the amplitude PDF equation, and direct
//! ensemble simulation of the four-wave dynamics.

pub mod collision;
pub mod ensemble;
pub mod error;
pub mod kinetic;
pub mod pdf;
pub mod quadrature;
pub mod stats;
pub mod wave_model;

pub use error::{Error, Result};
