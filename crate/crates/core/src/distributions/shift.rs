use super::{sqrt_gap, NigParams};
use crate::error::{Error, Result};

/// Law of the one-period log gross return when the composite variable is
/// log-NIG: the same shape parameters with location
/// `risk_free - delta (sqrt(alpha^2 - beta^2) - sqrt(alpha^2 - (beta - 1)^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedNigLaw {
    base: NigParams,
    risk_free: f64,
    shifted_location: f64,
}

impl ShiftedNigLaw {
    pub fn base(&self) -> &NigParams {
        &self.base
    }

    pub fn risk_free(&self) -> f64 {
        self.risk_free
    }

    pub fn shifted_location(&self) -> f64 {
        self.shifted_location
    }

    /// `NIG(m, alpha, beta, delta)`.
    pub fn law(&self) -> NigParams {
        self.base.with_mu(self.shifted_location).expect("shape parameters already validated")
    }
}

/// The location correction term `delta (sqrt(alpha^2 - beta^2) - sqrt(alpha^2 - (beta - 1)^2))`.
pub(crate) fn shift_correction(p: &NigParams) -> Result<f64> {
    let (alpha, beta) = (p.alpha(), p.beta());
    let lowered = beta - 1.0;
    if !(lowered.abs() < alpha) {
        return Err(Error::Domain(format!(
            "return-law shift needs alpha^2 > (beta - 1)^2; alpha = {alpha}, beta = {beta}"
        )));
    }
    Ok(p.delta() * sqrt_gap(alpha * alpha, beta * beta, lowered * lowered))
}

pub fn shifted_return_law(p: &NigParams, risk_free: f64) -> Result<ShiftedNigLaw> {
    if !risk_free.is_finite() {
        return Err(Error::InvalidParameter(format!("risk-free rate must be finite, got {risk_free}")));
    }
    let shifted_location = risk_free - shift_correction(p)?;
    Ok(ShiftedNigLaw { base: *p, risk_free, shifted_location })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_scale_keeps_risk_free() {
        let p = NigParams::new(0.4, 3.0, 0.5, 1e-12).unwrap();
        let law = shifted_return_law(&p, 0.02).unwrap();
        assert!((law.shifted_location() - 0.02).abs() < 1e-10);
    }

    #[test]
    fn lognormal_limit() {
        let (sigma, alpha) = (0.2f64, 1e6);
        let p = NigParams::new(0.0, alpha, 0.0, sigma * sigma * alpha).unwrap();
        let law = shifted_return_law(&p, 0.03).unwrap();
        assert!((law.shifted_location() - (0.03 - sigma * sigma / 2.0)).abs() < 1e-6);
    }

    #[test]
    fn direct_arithmetic() {
        let p = NigParams::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let law = shifted_return_law(&p, 0.0).unwrap();
        assert!((law.shifted_location() + (2.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!((law.shifted_location() + 0.267_949).abs() < 1e-6);
        assert_eq!(law.law().alpha(), 2.0);
        assert_eq!(law.law().mu(), law.shifted_location());
    }

    #[test]
    fn domain_error_when_lowered_beta_leaves_cone() {
        let p = NigParams::new(0.0, 1.0, -0.5, 1.0).unwrap();
        assert!(shifted_return_law(&p, 0.0).is_err());
    }
}
