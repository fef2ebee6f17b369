//! Quadrature rules, special functions and the seeded Monte Carlo engine.

mod montecarlo;
mod quadrature;
mod special;

pub use montecarlo::{mc_expectation, mc_moments, uniform_open, McSpec, Moments, MC_BLOCKS};
pub use quadrature::{gauss_legendre, integrate_1d, integrate_2d, integrate_vec, QuadratureSpec};
pub use special::{bessel_i, bessel_i_scaled, erfc};
