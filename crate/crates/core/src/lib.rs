//! Pseudo-spectral laboratory for the Benjamin-Ono equation and its
//! dissipative Benjamin-Ono-Burgers perturbation on a periodic domain.
//!
//! * [`spectral`] grid, transforms and Fourier multipliers
//! * [`dynamics`] right-hand sides, exact linear propagator, ETDRK4 integrator
//! * [`diagnostics`] Sobolev norms, energy, balance-law residuals
//! * [`lab`] reference solves, epsilon sweeps and rate fitting

pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod lab;
pub mod spectral;

pub use error::{Error, Result};
