use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, InverseGaussian};

use crate::error::{Error, Result};
use crate::special_math::{integrate, QuadratureSpec};

/// Inverse-Gaussian subordinator law at unit time.
///
/// `shape_alpha` multiplies the squared deviation in the exponent and
/// `mean_beta` is the mean, i.e. the density is
/// `sqrt(alpha / (2 pi x^3)) exp(-alpha (x - beta)^2 / (2 beta^2 x))`.
/// At time `t` the subordinator has mean `beta t` and shape `alpha t^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgParams {
    shape_alpha: f64,
    mean_beta: f64,
}

impl IgParams {
    pub fn new(shape_alpha: f64, mean_beta: f64) -> Result<Self> {
        if !(shape_alpha > 0.0 && shape_alpha.is_finite() && mean_beta > 0.0 && mean_beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "IG requires shape_alpha > 0 and mean_beta > 0, got ({shape_alpha}, {mean_beta})"
            )));
        }
        Ok(Self { shape_alpha, mean_beta })
    }

    pub fn shape_alpha(&self) -> f64 {
        self.shape_alpha
    }

    pub fn mean_beta(&self) -> f64 {
        self.mean_beta
    }

    /// Laplace exponent `ln E[exp(v T(1))]`, real for `v <= alpha / (2 beta^2)`.
    pub(crate) fn ln_mgf_unchecked(&self, v: f64) -> f64 {
        let (a, b) = (self.shape_alpha, self.mean_beta);
        let inner = (1.0 - 2.0 * b * b * v / a).max(0.0);
        (a / b) * (1.0 - inner.sqrt())
    }

    /// Draw the subordinator value at time `time > 0`.
    pub fn sample_at<R: Rng + ?Sized>(&self, rng: &mut R, time: f64) -> f64 {
        InverseGaussian::new(self.mean_beta * time, self.shape_alpha * time * time)
            .expect("positive IG parameters")
            .sample(rng)
    }
}

fn compound_exponent(t: &IgParams, u: &IgParams, x: f64, time: f64) -> f64 {
    let (at, bt) = (t.shape_alpha, t.mean_beta);
    let (au, bu) = (u.shape_alpha, u.mean_beta);
    let dt = x - bt * time;
    let du = time - bu;
    -at * dt * dt / (2.0 * bt * bt * x) - au * du * du / (2.0 * bu * bu * time) - 0.5 * time.ln()
}

/// Density of `V(1) = T(U(1))` for independent IG subordinators `T`, `U`.
///
/// Evaluated as the single integral over the inner clock value `u`:
/// `sqrt(aT aU / x^3) / (2 pi) * int_0^inf u^{-1/2} exp(...) du`.
pub fn compound_ig_pdf(t_params: &IgParams, u_params: &IgParams, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("compound IG density requires x > 0, got {x}")));
    }
    // Locate the peak of the integrand on a log grid and factor it out so the
    // quadrature works on O(1) values whatever the magnitude of the density.
    let scale = u_params.mean_beta.max(x / t_params.mean_beta);
    let mut peak = f64::NEG_INFINITY;
    for k in 0..=120 {
        let time = scale * 10f64.powf(-6.0 + 9.0 * k as f64 / 120.0);
        peak = peak.max(compound_exponent(t_params, u_params, x, time));
    }
    let inner = integrate(
        |time: f64| {
            if time <= 0.0 {
                0.0
            } else {
                (compound_exponent(t_params, u_params, x, time) - peak).exp()
            }
        },
        0.0,
        f64::INFINITY,
        spec,
    )?;
    let ln_prefactor = 0.5 * (t_params.shape_alpha * u_params.shape_alpha).ln() - 1.5 * x.ln() - (2.0 * PI).ln();
    Ok((ln_prefactor + peak).exp() * inner.value)
}

/// Largest `v` at which the compound MGF is real.
pub fn compound_ig_mgf_upper(t_params: &IgParams, u_params: &IgParams) -> f64 {
    let (at, bt) = (t_params.shape_alpha, t_params.mean_beta);
    let (au, bu) = (u_params.shape_alpha, u_params.mean_beta);
    let c = au * bt / (2.0 * bu * bu * at);
    let gap = (1.0 - c).max(0.0);
    at / (2.0 * bt * bt) * (1.0 - gap * gap)
}

/// `E[exp(v V(1))]` for `V(1) = T(U(1))`, `v <= compound_ig_mgf_upper`.
pub fn compound_ig_mgf(t_params: &IgParams, u_params: &IgParams, v: f64) -> Result<f64> {
    let upper = compound_ig_mgf_upper(t_params, u_params);
    if !(v <= upper) {
        return Err(Error::Domain(format!("compound IG mgf defined for v <= {upper}, got {v}")));
    }
    let inner_exponent = t_params.ln_mgf_unchecked(v);
    Ok(u_params.ln_mgf_unchecked(inner_exponent).exp())
}

/// One draw of `T(U(1))`.
pub fn sample_compound_ig<R: Rng + ?Sized>(t_params: &IgParams, u_params: &IgParams, rng: &mut R) -> f64 {
    let clock = u_params.sample_at(rng, 1.0);
    t_params.sample_at(rng, clock)
}
