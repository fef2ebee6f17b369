//! Gaussian entanglement distribution between two ground stations over
//! satellite links subject to beam-wander fading.
//!
//! The crate is `no_std` (it needs `alloc` for quadrature tables) and is
//! organised bottom-up:
//!
//! - [`gaussian`]: two-mode covariance matrices, symplectic spectra,
//!   logarithmic negativity, loss and excess-noise maps.
//! - [`numerics`]: composite Gauss–Legendre quadrature, `erfc`, modified
//!   Bessel functions and a seeded Monte Carlo engine.
//! - [`fading`]: the log-negative Weibull beam-wander channel and the
//!   four-link geometry.
//! - [`schemes`]: direct transmission, satellite-source and entanglement
//!   swapping, per realization and ensemble averaged.
//! - [`postselect`]: classical threshold post-selection and quantum
//!   tap-and-measure distillation.
//! - [`effective`]: reduction to effective lossy two-mode squeezed states and
//!   the scheme-ordering check.
//!
//! All quadratures use the vacuum-variance-one convention (ħ = 2) and
//! lengths are in units of the aperture radius β.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub(crate) mod math;

pub mod effective;
pub mod fading;
pub mod gaussian;
pub mod numerics;
pub mod postselect;
pub mod schemes;

pub use error::{Error, Result};

/// Allowed undershoot of the smallest symplectic eigenvalue below 1.
pub const TOL_PHYS: f64 = 1e-9;

/// Relative tolerance on negative discriminants in closed-form spectra.
pub const TOL_NUM: f64 = 1e-12;
