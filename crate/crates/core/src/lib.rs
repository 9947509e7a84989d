//! Numerical laboratory for the Meissner-state equations of a type-II
//! superconductor: interior solvers, superheating continuation, large-κ
//! convergence studies and exterior spherical-harmonic problems.

pub mod constitutive;
pub mod discrete;
pub mod exterior;
pub mod error;
pub mod interior;
pub mod linalg;
pub mod oned;
pub mod superheating;

pub use error::{Error, Result};
