use super::optimizer::{nelder_mead, nelder_mead_restarts, newton_refine, SimplexOptions};
use super::window::{sample_moments, ReturnWindow};
use super::{FitOptions, FitResult};
use crate::distributions::NigParams;
use crate::error::{Error, Result};
use crate::special_math::{k1_large_scaled, ln_bessel_k1, K1_SERIES_SPLIT};

/// Margin kept between the fit and the edges `alpha = |beta|`, `delta = 0`,
/// measured on the standardized window.
pub const CONSTRAINT_EPSILON: f64 = 1e-6;

const MU_BOUND: f64 = 1e6;
const LN_AD: (f64, f64) = (-4.605_170_185_988_091, 13.815_510_557_964_274); // ln 1e-2, ln 1e6
const LN_DA: (f64, f64) = (-13.815_510_557_964_274, 4.605_170_185_988_091); // ln 1e-6, ln 1e2
const TANH_BOUND: f64 = 8.0;
const EDGE: f64 = 1e-3;

/// Log-likelihood of `xs` under `p`.
pub fn nig_log_likelihood(p: &NigParams, xs: &[f64]) -> f64 {
    xs.iter().map(|&x| p.ln_pdf(x)).sum()
}

/// Negative log-likelihood used inside the search. Same value as
/// `-nig_log_likelihood` up to rounding, but takes one logarithm per block
/// of points instead of several per point.
fn fast_negative_log_likelihood(p: &NigParams, xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    let (mu, alpha, beta, delta) = (p.mu(), p.alpha(), p.beta(), p.delta());
    let gamma = p.gamma();
    let base = alpha.ln() + delta.ln() - std::f64::consts::PI.ln() - delta * beta * beta / (gamma + alpha);
    let large_base = base - 0.5 * alpha.ln();
    let delta2 = delta * delta;
    let mut total = 0.0;
    for chunk in xs.chunks(BLOCK) {
        let mut product = 1.0;
        let mut count_large = 0usize;
        for &x in chunk {
            let y = x - mu;
            let r = (delta2 + y * y).sqrt();
            let z = alpha * r;
            total += beta * y - alpha * y * y / (r + delta);
            if z >= K1_SERIES_SPLIT {
                // ln(sqrt(z) e^z K1(z)) - ln r - ln sqrt(z) = ln(Q / r^1.5) - ln sqrt(alpha)
                product *= k1_large_scaled(z) / (r * r.sqrt());
                count_large += 1;
            } else {
                total += base - r.ln() + ln_bessel_k1(z) + z;
            }
        }
        total += product.ln() + count_large as f64 * large_base;
    }
    -total
}

/// Standardized-scale parameters from `(mu, ln(alpha delta), ln(delta/alpha), atanh(beta/alpha))`.
fn decode(theta: &[f64]) -> Option<NigParams> {
    let (mu, a, b, c) = (theta[0], theta[1], theta[2], theta[3]);
    if mu.abs() > MU_BOUND || !(LN_AD.0..=LN_AD.1).contains(&a) || !(LN_DA.0..=LN_DA.1).contains(&b) || c.abs() > TANH_BOUND
    {
        return None;
    }
    let alpha = (0.5 * (a - b)).exp();
    let delta = (0.5 * (a + b)).exp();
    let beta = alpha * c.tanh();
    if !(alpha > beta.abs() + CONSTRAINT_EPSILON && delta > CONSTRAINT_EPSILON) {
        return None;
    }
    NigParams::new(mu, alpha, beta, delta).ok()
}

fn encode(p: &NigParams) -> [f64; 4] {
    let (alpha, delta) = (p.alpha(), p.delta());
    [p.mu(), (alpha * delta).ln(), (delta / alpha).ln(), (p.beta() / alpha).atanh()]
}

/// Method-of-moments start for a sample with unit variance and zero mean.
fn moment_start(skewness: f64, excess_kurtosis: f64) -> [f64; 4] {
    if !(excess_kurtosis > 0.0) {
        let p = NigParams::new(0.0, 10.0, 0.0, 10.0).expect("valid fallback");
        return encode(&p);
    }
    let (s, k) = (skewness, excess_kurtosis);
    let denom = 3.0 * k - 4.0 * s * s;
    let mut rho2 = if denom > 0.0 { s * s / denom } else { 0.81 };
    rho2 = rho2.min(0.81);
    let root = (1.0 - rho2).sqrt();
    let zeta = 3.0 * (1.0 + 4.0 * rho2) / k;
    let ad = (zeta / root).clamp(0.05, 1e5);
    let da = root * root * root;
    let (alpha, delta) = ((ad / da).sqrt(), (ad * da).sqrt());
    let rho = rho2.sqrt().copysign(s);
    let beta = rho * alpha;
    let mu = -delta * rho / root;
    encode(&NigParams::new(mu, alpha, beta, delta).expect("moment start is inside the cone"))
}

fn at_failure_edge(theta: &[f64]) -> bool {
    theta[1] < LN_AD.0 + EDGE
        || theta[2] < LN_DA.0 + EDGE
        || theta[2] > LN_DA.1 - EDGE
        || theta[3].abs() > TANH_BOUND - EDGE
}

pub fn fit_nig_mle(window: &ReturnWindow) -> Result<FitResult<NigParams>> {
    fit_nig_mle_with(window, &FitOptions::default())
}

/// Maximum-likelihood NIG fit. The search runs on the standardized window
/// and maps back through the affine closure of the NIG family, so the fit
/// is exactly equivariant under shifts and rescalings of the data.
pub fn fit_nig_mle_with(window: &ReturnWindow, options: &FitOptions) -> Result<FitResult<NigParams>> {
    let (mean, sd, skewness, kurtosis) = sample_moments(window.values());
    if !(sd >= 1e-12) {
        return Err(Error::DegenerateData(format!("sample standard deviation {sd:e} is below 1e-12")));
    }
    let z: Vec<f64> = window.values().iter().map(|x| (x - mean) / sd).collect();
    let objective = |theta: &[f64]| match decode(theta) {
        Some(p) => fast_negative_log_likelihood(&p, &z),
        None => f64::INFINITY,
    };
    let start = moment_start(skewness, kurtosis);
    let steps = [0.1, 0.5, 0.3, 0.3];
    let mut found = nelder_mead_restarts(&objective, &start, &steps, options.restarts, options.seed, &options.simplex);
    // A short, tight final run pins the optimum well below the search
    // tolerance so that fits of shifted or rescaled data agree closely.
    let polish = SimplexOptions { max_evaluations: 800, f_abs_tol: 0.0, f_rel_tol: 1e-15, x_tol: 1e-10 };
    let polished = nelder_mead(&objective, &found.x, &steps.map(|s| s * 1e-3), &polish);
    if polished.value <= found.value {
        found = super::optimizer::Minimum {
            iterations: found.iterations + polished.iterations,
            evaluations: found.evaluations + polished.evaluations,
            converged: found.converged,
            ..polished
        };
    }
    // Newton steps on the smooth likelihood settle the last digits, so that
    // fits of shifted data agree to well below the simplex resolution.
    if let Some((x, value)) = newton_refine(&objective, &found.x, 1e-4, 1e-10, 1e-3, 3) {
        found.x = x;
        found.value = value;
    }
    if !found.value.is_finite() || at_failure_edge(&found.x) {
        return Err(Error::FitFailure(format!(
            "NIG likelihood search stopped at the constraint boundary (alpha delta = {:e}, beta/alpha = {})",
            (found.x[1]).exp(),
            found.x[3].tanh()
        )));
    }
    let standardized = decode(&found.x).expect("finite objective implies feasible point");
    let params = standardized.affine(sd, mean)?;
    let n = z.len() as f64;
    Ok(FitResult {
        params,
        objective_value: -found.value - n * sd.ln(),
        converged: found.converged,
        iterations: found.iterations,
        standard_errors: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(xs: Vec<f64>) -> ReturnWindow {
        ReturnWindow::new(xs, 0).unwrap()
    }

    #[test]
    fn encode_decode_round_trip() {
        let p = NigParams::new(0.2, 3.0, -1.2, 0.7).unwrap();
        let q = decode(&encode(&p)).unwrap();
        assert!((q.alpha() - 3.0).abs() < 1e-12 && (q.beta() + 1.2).abs() < 1e-12);
        assert!((q.delta() - 0.7).abs() < 1e-12 && q.mu() == 0.2);
    }

    #[test]
    fn fast_likelihood_matches_density() {
        for p in [
            NigParams::new(0.1, 2.0, 0.5, 1.0).unwrap(),
            NigParams::new(0.0, 0.3, -0.2, 0.05).unwrap(),
            NigParams::new(-0.4, 900.0, 100.0, 800.0).unwrap(),
        ] {
            let xs = p.sample(257, 9);
            let slow = -nig_log_likelihood(&p, &xs);
            assert!((fast_negative_log_likelihood(&p, &xs) - slow).abs() < 1e-11 * slow.abs().max(1.0));
        }
    }

    #[test]
    fn moment_start_reproduces_moments() {
        let start = decode(&moment_start(0.6, 2.5)).unwrap().moments();
        assert!(start.mean.abs() < 1e-12);
        assert!((start.variance - 1.0).abs() < 1e-12);
        assert!((start.skewness - 0.6).abs() < 1e-9);
        assert!((start.excess_kurtosis - 2.5).abs() < 1e-9);
    }

    #[test]
    fn log_likelihood_reported_in_data_units() {
        let xs = NigParams::new(0.001, 80.0, 5.0, 0.02).unwrap().sample(500, 3);
        let fit = fit_nig_mle(&window(xs.clone())).unwrap();
        let direct = nig_log_likelihood(&fit.params, &xs);
        assert!((fit.objective_value - direct).abs() < 1e-7 * direct.abs());
    }

    #[test]
    fn degenerate_spread_is_rejected() {
        let xs: Vec<f64> = (0..100).map(|i| 1.0 + 1e-14 * (i % 2) as f64).collect();
        assert!(matches!(fit_nig_mle(&window(xs)), Err(Error::DegenerateData(_))));
    }
}
