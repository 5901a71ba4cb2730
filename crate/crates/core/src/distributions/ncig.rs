use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ig::{sample_compound_ig, IgParams};
use super::seeded_rng;
use crate::error::{Error, Result};

/// Parameters of the normal compound inverse Gaussian law.
///
/// `Z(1) = mu V + delta sqrt(V) G` where `V = T(U(1))` and both `T` and `U`
/// are IG subordinators with shape `alpha` and mean `beta`. All of `alpha`,
/// `beta`, `delta` must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcigParams {
    mu: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
}

impl NcigParams {
    pub fn new(mu: f64, alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("NCIG mu must be finite, got {mu}")));
        }
        for (name, value) in [("alpha", alpha), ("beta", beta), ("delta", delta)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("NCIG {name} must be positive, got {value}")));
            }
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

    /// Law of the IG subordinators `T` and `U`.
    pub fn subordinator(&self) -> IgParams {
        IgParams::new(self.alpha, self.beta).expect("validated at construction")
    }

    /// Law of `scale * Z` for `scale > 0`.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
        }
        Self::new(self.mu * scale, self.alpha, self.beta, self.delta * scale)
    }

    /// Supremum of the Brownian exponent `w = s mu + delta^2 s^2 / 2` for
    /// which the MGF stays real. For `beta <= 1/2` the inner radical sets
    /// the limit, above it the outer one does.
    pub fn exponent_upper(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        if b <= 0.5 {
            a / (2.0 * b * b)
        } else {
            a / (2.0 * b * b * b) * (1.0 - 1.0 / (4.0 * b))
        }
    }

    /// `ln E[exp(s Z(1))]`.
    pub fn ln_mgf(&self, s: f64) -> Result<f64> {
        let w = s * self.mu + 0.5 * self.delta * self.delta * s * s;
        let (a, b) = (self.alpha, self.beta);
        let inner = 1.0 - 2.0 * b * b / a * w;
        let outer = if inner >= 0.0 { 1.0 - 2.0 * b * (1.0 - inner.sqrt()) } else { f64::NAN };
        if !(inner >= 0.0 && outer > 0.0) {
            return Err(Error::Domain(format!(
                "NCIG mgf undefined at s = {s}: need s mu + delta^2 s^2 / 2 < {}",
                self.exponent_upper()
            )));
        }
        Ok(exponent(b, w, inner.sqrt(), outer.sqrt()))
    }

    pub fn mgf(&self, s: f64) -> Result<f64> {
        Ok(self.ln_mgf(s)?.exp())
    }

    /// Characteristic function: the MGF formula at `s = i v`, principal
    /// branches throughout. Both radicands keep a real part >= 1 on the real
    /// `v` axis so the principal branch is the analytic continuation.
    pub fn cf(&self, v: f64) -> Complex64 {
        let (a, b) = (self.alpha, self.beta);
        let w = Complex64::new(-0.5 * self.delta * self.delta * v * v, self.mu * v);
        let one = Complex64::from(1.0);
        let inner = (one - (2.0 * b * b / a) * w).sqrt();
        let outer = (one - 2.0 * b * (one - inner)).sqrt();
        exponent(b, w, inner, outer).exp()
    }

    /// Exact mean `mu E[V(1)] = mu beta^2`.
    pub fn mean(&self) -> f64 {
        self.mu * self.beta * self.beta
    }

    /// Mean from a central difference of the MGF at zero.
    pub fn mean_from_mgf(&self, step: f64) -> Result<f64> {
        Ok((self.mgf(step)? - self.mgf(-step)?) / (2.0 * step))
    }

    pub fn variance(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let var_clock = b.powi(4) * (1.0 + b) / a;
        self.delta * self.delta * b * b + self.mu * self.mu * var_clock
    }

    /// One draw of the random clock `V(1)`.
    pub fn sample_clock<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sub = self.subordinator();
        sample_compound_ig(&sub, &sub, rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let clock = self.sample_clock(rng);
                let g: f64 = StandardNormal.sample(rng);
                self.mu * clock + self.delta * clock.sqrt() * g
            })
            .collect()
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(&mut seeded_rng(seed), n)
    }
}

/// `(alpha/beta)(1 - outer)` with `outer = sqrt(1 - 2 beta (1 - inner))` and
/// `inner = sqrt(1 - 2 beta^2 w / alpha)`, rationalized twice so that
/// nothing cancels when `beta` or `w` is small.
fn exponent<T>(beta: f64, w: T, inner: T, outer: T) -> T
where
    T: Copy + std::ops::Add<f64, Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T> + std::ops::Mul<f64, Output = T>,
{
    w * (4.0 * beta * beta) / ((inner + 1.0) * (outer + 1.0))
}
