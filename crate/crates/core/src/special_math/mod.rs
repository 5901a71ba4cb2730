//! Special functions and adaptive quadrature.
//!
//! Only what the densities need: the modified Bessel function of the second
//! kind of order one (plus order zero and the `I` companions used to check
//! it), and a Gauss-Kronrod integrator that handles semi-infinite ranges.

mod bessel;
mod quadrature;

pub(crate) use bessel::{k1_large_scaled, K1_SERIES_SPLIT};
pub use bessel::{bessel_k1, bessel_k1_scaled, ln_bessel_k1, K1_UNDERFLOW_CUTOFF};
pub use quadrature::{integrate, Estimate, IntegrationError, QuadratureSpec};

