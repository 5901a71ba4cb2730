use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};

use super::{seeded_rng, sqrt_gap};
use crate::error::{Error, Result};
use crate::special_math::ln_bessel_k1;

/// Parameters of the normal inverse Gaussian law `NIG(mu, alpha, beta, delta)`.
///
/// `mu` is location, `alpha` the tail steepness, `beta` the asymmetry and
/// `delta` the scale. Requires `alpha > 0`, `delta > 0`, `alpha^2 > beta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigParams {
    mu: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
}

/// Closed-form moments of a NIG law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NigMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl NigParams {
    pub fn new(mu: f64, alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        if !(mu.is_finite() && alpha.is_finite() && beta.is_finite() && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "NIG parameters must be finite: ({mu}, {alpha}, {beta}, {delta})"
            )));
        }
        if !(alpha > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "NIG requires alpha > 0 and delta > 0, got alpha = {alpha}, delta = {delta}"
            )));
        }
        if !(alpha * alpha > beta * beta) || alpha == beta.abs() {
            return Err(Error::InvalidParameter(format!(
                "NIG requires alpha^2 > beta^2, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Self { mu, alpha, beta, delta })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `sqrt(alpha^2 - beta^2)`
    pub fn gamma(&self) -> f64 {
        ((self.alpha - self.beta.abs()) * (self.alpha + self.beta.abs())).sqrt()
    }

    /// Same law with a different location.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(mu, self.alpha, self.beta, self.delta)
    }

    /// Law of `scale * X + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale != 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!("affine scale must be non-zero, got {scale}")));
        }
        Self::new(
            scale * self.mu + shift,
            self.alpha / scale.abs(),
            self.beta / scale,
            self.delta * scale.abs(),
        )
    }

    /// Log density. Evaluated entirely in log space so that neither the
    /// Bessel factor nor `exp(delta * gamma)` overflows.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let (alpha, beta, delta) = (self.alpha, self.beta, self.delta);
        let y = x - self.mu;
        let r = delta.hypot(y);
        let gamma = self.gamma();
        // delta*gamma - alpha*r + beta*y, rearranged to avoid cancellation
        let exponent = -delta * beta * beta / (gamma + alpha) - alpha * y * y / (r + delta) + beta * y;
        // ln K1(alpha r) already carries -alpha r; add it back before combining
        let z = alpha * r;
        let ln_k1_scaled = ln_bessel_k1(z) + z;
        alpha.ln() + delta.ln() - PI.ln() - r.ln() + ln_k1_scaled + exponent
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Moment-generating function `E[exp(t X)]`; needs `(beta + t)^2 < alpha^2`.
    pub fn mgf(&self, t: f64) -> Result<f64> {
        Ok(self.ln_mgf(t)?.exp())
    }

    pub fn ln_mgf(&self, t: f64) -> Result<f64> {
        let shifted = self.beta + t;
        if !(shifted.abs() < self.alpha) {
            return Err(Error::Domain(format!(
                "NIG mgf requires (beta + t)^2 < alpha^2; beta + t = {shifted}, alpha = {}",
                self.alpha
            )));
        }
        let a2 = self.alpha * self.alpha;
        Ok(self.mu * t + self.delta * sqrt_gap(a2, self.beta * self.beta, shifted * shifted))
    }

    /// Characteristic function `E[exp(i v X)]`.
    pub fn cf(&self, v: f64) -> Complex64 {
        let a2 = self.alpha * self.alpha;
        let shifted = Complex64::new(self.beta, v);
        let root = (Complex64::from(a2) - shifted * shifted).sqrt();
        (Complex64::new(0.0, self.mu * v) + self.delta * (self.gamma() - root)).exp()
    }

    pub fn moments(&self) -> NigMoments {
        let (alpha, beta, delta) = (self.alpha, self.beta, self.delta);
        let gamma = self.gamma();
        NigMoments {
            mean: self.mu + delta * beta / gamma,
            variance: delta * alpha * alpha / gamma.powi(3),
            skewness: 3.0 * beta / (alpha * (delta * gamma).sqrt()),
            excess_kurtosis: 3.0 * (1.0 + 4.0 * beta * beta / (alpha * alpha)) / (delta * gamma),
        }
    }

    /// Inverse-Gaussian mixing law of the variance: mean `delta/gamma`, shape `delta^2`.
    fn mixing(&self) -> InverseGaussian<f64> {
        InverseGaussian::new(self.delta / self.gamma(), self.delta * self.delta)
            .expect("valid NIG parameters give a valid IG mixing law")
    }

    /// Draw from `mu + beta W + sqrt(W) G`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let mixing = self.mixing();
        (0..n)
            .map(|_| {
                let w = mixing.sample(rng);
                let g: f64 = StandardNormal.sample(rng);
                self.mu + self.beta * w + w.sqrt() * g
            })
            .collect()
    }

    /// `n` i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(&mut seeded_rng(seed), n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(mu: f64, alpha: f64, beta: f64, delta: f64) -> NigParams {
        NigParams::new(mu, alpha, beta, delta).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(NigParams::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(NigParams::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(NigParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(NigParams::new(0.0, 1.0, -1.5, 1.0).is_err());
        assert!(NigParams::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
        assert!(NigParams::new(0.0, 1.0, 0.999, 1.0).is_ok());
    }

    #[test]
    fn pdf_at_center_of_standard_symmetric_law() {
        // e K1(1) / pi with K1(1) = 0.6019072302
        let want = std::f64::consts::E * 0.601_907_230_2 / PI;
        assert!((p(0.0, 1.0, 0.0, 1.0).pdf(0.0) - want).abs() < 1e-9);
        assert!((want - 0.520_804).abs() < 1e-6);
    }

    #[test]
    fn symmetric_when_beta_zero() {
        let law = p(0.3, 2.5, 0.0, 0.7);
        for x in [0.01, 0.5, 1.0, 3.0, 10.0] {
            assert!((law.pdf(0.3 + x) - law.pdf(0.3 - x)).abs() < 1e-15);
        }
    }

    #[test]
    fn pdf_stays_finite_for_extreme_scale() {
        let law = p(0.0, 1e6, 0.0, 4e4);
        let v = law.pdf(0.1);
        assert!(v.is_finite() && v > 0.0);
        let law = p(0.0, 50.0, 45.0, 0.01);
        assert!(law.pdf(30.0) > 0.0);
    }

    #[test]
    fn mgf_values() {
        let law = p(0.1, 2.0, 0.5, 1.3);
        assert_eq!(law.mgf(0.0).unwrap(), 1.0);
        let law = p(0.0, 2.0, 0.0, 1.0);
        assert!((law.mgf(1.0).unwrap() - (2.0 - 3f64.sqrt()).exp()).abs() < 1e-12);
        assert!((law.mgf(1.0).unwrap() - 1.307_281).abs() < 1e-6);
        assert!(law.mgf(2.0).is_err());
        assert!(law.mgf(-2.5).is_err());
    }

    #[test]
    fn mgf_normal_limit() {
        let sigma: f64 = 0.2;
        let alpha = 1e6;
        let law = p(0.0, alpha, 0.0, sigma * sigma * alpha);
        let want = (sigma * sigma * 0.25 / 2.0).exp();
        assert!(((law.mgf(0.5).unwrap() - want) / want).abs() < 1e-4);
        assert!((want - 1.005_013).abs() < 1e-6);
    }

    #[test]
    fn cf_is_hermitian_and_bounded() {
        let law = p(0.2, 3.0, -1.0, 0.8);
        assert!((law.cf(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for v in [0.1, 0.7, 2.0, 9.0] {
            let (a, b) = (law.cf(v), law.cf(-v));
            assert!((a - b.conj()).norm() < 1e-14);
            assert!(a.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn moment_formulas() {
        let m = p(0.0, 2.0, 1.0, 1.0).moments();
        assert!((m.mean - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((m.variance - 4.0 / 3f64.powf(1.5)).abs() < 1e-12);
        assert!((m.mean - 0.57735).abs() < 1e-5);
        assert!((m.variance - 0.76980).abs() < 1e-5);
        assert_eq!(p(0.0, 3.0, 0.0, 2.0).moments().skewness, 0.0);
        assert!(m.excess_kurtosis > 0.0);
    }

    #[test]
    fn affine_map_moves_moments() {
        let law = p(0.1, 4.0, -1.0, 0.5);
        let m = law.moments();
        let mapped = law.affine(-2.0, 0.3).unwrap().moments();
        assert!((mapped.mean - (-2.0 * m.mean + 0.3)).abs() < 1e-12);
        assert!((mapped.variance - 4.0 * m.variance).abs() < 1e-12);
        assert!((mapped.skewness + m.skewness).abs() < 1e-12);
        assert!((mapped.excess_kurtosis - m.excess_kurtosis).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let law = p(0.0, 2.0, 1.0, 1.0);
        assert_eq!(law.sample(100, 7), law.sample(100, 7));
        assert_ne!(law.sample(100, 7), law.sample(100, 8));
    }
}
