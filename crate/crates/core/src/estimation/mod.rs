//! Per-window fitting: NIG by maximum likelihood, NCIG by the empirical
//! characteristic function.

mod ecf;
mod mle;
mod optimizer;
mod window;

pub use ecf::{ecf_objective, empirical_cf, fit_ncig_ecf, fit_ncig_ecf_with, EcfSpec, DEFAULT_ECF_GRID_MAX, DEFAULT_ECF_GRID_SIZE};
pub use mle::{fit_nig_mle, fit_nig_mle_with, nig_log_likelihood, CONSTRAINT_EPSILON};
pub use optimizer::{nelder_mead, nelder_mead_restarts, newton_refine, Minimum, SimplexOptions};
pub use window::{ReturnWindow, MIN_WINDOW};

/// Outcome of a single fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<P> {
    pub params: P,
    /// Log-likelihood for NIG fits, weighted CF distance for NCIG fits.
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub standard_errors: Option<Vec<f64>>,
}

/// Optimizer settings shared by both fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    pub simplex: SimplexOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { restarts: 5, seed: 0, simplex: SimplexOptions::default() }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}
