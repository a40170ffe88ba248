//! Coupled multirate infinitesimal GARK integrators.
//!
//! Two method families are provided for `y' = f^F(t, y) + f^S(t, y)`:
//!
//! * step predictor-corrector (SPC) schemes take one coupled implicit
//!   Runge–Kutta step over the whole system and then correct the fast part by
//!   integrating a modified fast ODE across the step;
//! * internal-stage predictor-corrector (IPC) schemes alternate a coupled
//!   predictor stage with a fast correction between consecutive abscissae.
//!
//! The crate also verifies coefficient sets against their order conditions,
//! evaluates linear stability functions, and ships the benchmark problems and
//! study harness used to measure convergence and work-precision behavior.

pub mod error;
pub mod harness;
pub mod integrators;
pub mod linalg;
pub mod phi;
pub mod problems;
pub mod quadrature;
pub mod stability;
pub mod tableaux;
pub mod verify;

pub use error::{Error, Result};
