use num_complex::Complex64;

use super::optimizer::nelder_mead_restarts;
use super::window::{sample_moments, ReturnWindow};
use super::{FitOptions, FitResult};
use crate::distributions::NcigParams;
use crate::error::{Error, Result};

pub const DEFAULT_ECF_GRID_SIZE: usize = 64;
/// Upper end of the default grid in units of `1 / sd`.
pub const DEFAULT_ECF_GRID_MAX: f64 = 20.0;
const GRID_MIN: f64 = 0.1;

const MEAN_BOUND: f64 = 100.0;
const LN_ALPHA: (f64, f64) = (-6.907_755_278_982_137, 13.815_510_557_964_274); // ln 1e-3, ln 1e6
const LN_BETA: (f64, f64) = (-9.210_340_371_976_182, 6.907_755_278_982_137); // ln 1e-4, ln 1e3
const LN_SCALE: (f64, f64) = (-9.210_340_371_976_182, 6.907_755_278_982_137); // ln 1e-4, ln 1e3
/// Grid points whose weight is below this cannot move the objective by
/// more than `4 * PRUNE_WEIGHT` and are skipped inside the search.
const PRUNE_WEIGHT: f64 = 1e-30;

/// Points and weights at which the empirical and model CFs are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct EcfSpec {
    grid: Vec<f64>,
    weights: Vec<f64>,
}

impl EcfSpec {
    pub fn new(grid: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Domain("ECF grid is empty".into()));
        }
        if grid.len() != weights.len() {
            return Err(Error::LengthMismatch(format!(
                "ECF grid has {} points but {} weights",
                grid.len(),
                weights.len()
            )));
        }
        if !grid.iter().all(|v| v.is_finite() && *v > 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("ECF grid must be positive, finite and strictly increasing".into()));
        }
        let total: f64 = weights.iter().sum();
        if !weights.iter().all(|w| w.is_finite() && *w > 0.0) || !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidParameter("ECF weights must be positive with a finite sum".into()));
        }
        Ok(Self { grid, weights })
    }

    /// `size` points equally spaced on `[0.1, grid_max] / sd` with weights
    /// `exp(-(v sd)^2)`.
    pub fn scaled(sd: f64, size: usize, grid_max: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::InvalidParameter(format!("ECF scale must be positive, got {sd}")));
        }
        if size == 0 {
            return Err(Error::Domain("ECF grid is empty".into()));
        }
        if !(grid_max > GRID_MIN) {
            return Err(Error::InvalidParameter(format!("ECF grid maximum must exceed {GRID_MIN}, got {grid_max}")));
        }
        let unit: Vec<f64> = if size == 1 {
            vec![GRID_MIN]
        } else {
            (0..size).map(|k| GRID_MIN + (grid_max - GRID_MIN) * k as f64 / (size - 1) as f64).collect()
        };
        let weights = unit.iter().map(|u| (-u * u).exp()).collect();
        Self::new(unit.iter().map(|u| u / sd).collect(), weights)
    }

    /// The default design for a window: 64 points, grid maximum 20.
    pub fn default_for(window: &ReturnWindow) -> Result<Self> {
        Self::scaled(window.std_dev(), DEFAULT_ECF_GRID_SIZE, DEFAULT_ECF_GRID_MAX)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `(1/n) sum exp(i v x_j)`.
pub fn empirical_cf(window: &ReturnWindow, v: f64) -> Complex64 {
    ecf_values(window.values(), v)
}

fn ecf_values(xs: &[f64], v: f64) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for &x in xs {
        let (s, c) = (v * x).sin_cos();
        re += c;
        im += s;
    }
    Complex64::new(re, im) / xs.len() as f64
}

/// `sum_k w_k |ecf(v_k) - cf(v_k)|^2`.
pub fn ecf_objective(window: &ReturnWindow, spec: &EcfSpec, params: &NcigParams) -> f64 {
    spec.grid
        .iter()
        .zip(&spec.weights)
        .map(|(&v, &w)| w * (empirical_cf(window, v) - params.cf(v)).norm_sqr())
        .sum()
}

/// Search coordinates `(mu beta^2, ln alpha, ln beta, ln(delta beta))`.
/// As `beta -> 0` with the mean and the Brownian scale held fixed the law
/// tends to a three-parameter limit; these coordinates keep that ridge
/// axis-aligned instead of sending `mu` and `delta` to infinity.
fn decode(theta: &[f64]) -> Option<NcigParams> {
    let (mean, la, lb, ls) = (theta[0], theta[1], theta[2], theta[3]);
    if mean.abs() > MEAN_BOUND
        || !(LN_ALPHA.0..=LN_ALPHA.1).contains(&la)
        || !(LN_BETA.0..=LN_BETA.1).contains(&lb)
        || !(LN_SCALE.0..=LN_SCALE.1).contains(&ls)
    {
        return None;
    }
    let beta = lb.exp();
    NcigParams::new(mean / (beta * beta), la.exp(), beta, ls.exp() / beta).ok()
}

pub fn fit_ncig_ecf(window: &ReturnWindow, spec: &EcfSpec) -> Result<FitResult<NcigParams>> {
    fit_ncig_ecf_with(window, spec, &FitOptions::default())
}

/// Weighted CF-distance NCIG fit. The search runs on the window divided by
/// its standard deviation, with the grid rescaled to match, which leaves
/// the objective unchanged.
pub fn fit_ncig_ecf_with(window: &ReturnWindow, spec: &EcfSpec, options: &FitOptions) -> Result<FitResult<NcigParams>> {
    let (mean, sd, _, kurtosis) = sample_moments(window.values());
    if !(sd >= 1e-12) {
        return Err(Error::DegenerateData(format!("sample standard deviation {sd:e} is below 1e-12")));
    }
    let ys: Vec<f64> = window.values().iter().map(|x| x / sd).collect();
    let active: Vec<(f64, f64, Complex64)> = spec
        .grid
        .iter()
        .zip(&spec.weights)
        .filter(|(_, &w)| w >= PRUNE_WEIGHT)
        .map(|(&v, &w)| (v * sd, w, ecf_values(&ys, v * sd)))
        .collect();
    let objective = |theta: &[f64]| match decode(theta) {
        Some(p) => active.iter().map(|&(u, w, t)| w * (t - p.cf(u)).norm_sqr()).sum(),
        None => f64::INFINITY,
    };
    let alpha0 = (6.0 / kurtosis.max(0.1)).clamp(1e-2, 1e5);
    let start = [mean / sd, alpha0.ln(), 0.0, 0.0];
    let steps = [0.05, 0.5, 0.3, 0.3];
    let found = nelder_mead_restarts(objective, &start, &steps, options.restarts, options.seed, &options.simplex);
    if !found.converged || !found.value.is_finite() {
        return Err(Error::FitFailure(format!(
            "NCIG characteristic-function search did not converge after {} iterations",
            found.iterations
        )));
    }
    let params = decode(&found.x).expect("finite objective implies feasible point").scaled(sd)?;
    Ok(FitResult {
        params,
        objective_value: ecf_objective(window, spec, &params),
        converged: true,
        iterations: found.iterations,
        standard_errors: None,
    })
}
