use std::collections::BinaryHeap;

use thiserror::Error;

use crate::error::{Error as CrateError, Result};

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    absolute_tolerance: f64,
    relative_tolerance: f64,
    max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(absolute_tolerance: f64, relative_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        if !(absolute_tolerance > 0.0 && absolute_tolerance.is_finite()) {
            return Err(CrateError::InvalidParameter(format!(
                "absolute_tolerance must be positive, got {absolute_tolerance}"
            )));
        }
        if !(relative_tolerance > 0.0 && relative_tolerance.is_finite()) {
            return Err(CrateError::InvalidParameter(format!(
                "relative_tolerance must be positive, got {relative_tolerance}"
            )));
        }
        if max_subdivisions == 0 {
            return Err(CrateError::InvalidParameter("max_subdivisions must be >= 1".into()));
        }
        Ok(Self { absolute_tolerance, relative_tolerance, max_subdivisions })
    }

    pub fn absolute_tolerance(&self) -> f64 {
        self.absolute_tolerance
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { absolute_tolerance: 1e-10, relative_tolerance: 1e-10, max_subdivisions: 1000 }
    }
}

/// A converged integral together with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error(
        "integration did not converge after {subdivisions} subdivisions \
         (estimate {estimate}, error bound {error_bound})"
    )]
    NoConvergence { estimate: f64, error_bound: f64, subdivisions: usize },

    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("invalid integration limits [{lower}, {upper}]")]
    InvalidLimits { lower: f64, upper: f64 },
}

// 21-point Gauss–Kronrod abscissae and weights (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_720_374_140_630,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> std::result::Result<Segment, IntegrationError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> std::result::Result<f64, IntegrationError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(IntegrationError::NonFinite { x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fc.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    let abs_integral = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_integral > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_integral);
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> std::result::Result<Estimate, IntegrationError> {
    let first = gauss_kronrod(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;

    loop {
        let value: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        let target = spec.absolute_tolerance.max(spec.relative_tolerance * value.abs());
        if error <= target {
            return Ok(Estimate { value, error, subdivisions });
        }
        let worst = *heap.peek().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let exhausted = subdivisions >= spec.max_subdivisions;
        // no representable midpoint left to split on
        let too_narrow = !(worst.a < mid && mid < worst.b)
            || (worst.b - worst.a).abs() <= 1e3 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE);
        if exhausted || too_narrow {
            return Err(IntegrationError::NoConvergence { estimate: value, error_bound: error, subdivisions });
        }
        heap.pop();
        heap.push(gauss_kronrod(&f, worst.a, mid)?);
        heap.push(gauss_kronrod(&f, mid, worst.b)?);
        subdivisions += 1;
    }
}

/// Integrate `f` over `[lower, upper]`; either limit may be infinite.
///
/// Infinite ranges are mapped onto a bounded interval first:
/// `[a, inf)` through `x = a + t/(1-t)`, `(-inf, b]` through
/// `x = b - t/(1-t)` and the whole line through `x = t/(1-t^2)`. Where the
/// integrand is exactly zero the Jacobian is skipped, so densities that
/// underflow in the far tail are fine.
///
/// Returns [`IntegrationError::NoConvergence`] (carrying the best estimate
/// and its error bound) rather than an inaccurate value.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lower: f64, upper: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    if lower.is_nan() || upper.is_nan() {
        return Err(IntegrationError::InvalidLimits { lower, upper }.into());
    }
    if lower == upper {
        return Ok(Estimate { value: 0.0, error: 0.0, subdivisions: 0 });
    }
    if lower > upper {
        let est = integrate(f, upper, lower, spec)?;
        return Ok(Estimate { value: -est.value, ..est });
    }
    let weighted = |x: f64, jac: f64| {
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    let est = match (lower.is_finite(), upper.is_finite()) {
        (true, true) => adaptive(&f, lower, upper, spec),
        (true, false) => adaptive(
            |t: f64| {
                let s = 1.0 - t;
                weighted(lower + t / s, 1.0 / (s * s))
            },
            0.0,
            1.0,
            spec,
        ),
        (false, true) => adaptive(
            |t: f64| {
                let s = 1.0 - t;
                weighted(upper - t / s, 1.0 / (s * s))
            },
            0.0,
            1.0,
            spec,
        ),
        (false, false) => adaptive(
            |t: f64| {
                let s = 1.0 - t * t;
                weighted(t / s, (1.0 + t * t) / (s * s))
            },
            -1.0,
            1.0,
            spec,
        ),
    };
    Ok(est?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn rule_weights_sum_to_interval_length() {
        let kronrod: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let gauss: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((kronrod - 2.0).abs() < 1e-14);
        assert!((gauss - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_rule_is_exact_for_low_degree_polynomials() {
        for degree in 0..=31 {
            let seg = gauss_kronrod(&|x: f64| x.powi(degree), 0.0, 1.0).unwrap();
            let want = 1.0 / (degree as f64 + 1.0);
            assert!((seg.value - want).abs() < 1e-14, "degree {degree}");
        }
    }

    #[test]
    fn standard_normal_over_real_line() {
        let est = integrate(|x| (-0.5 * x * x).exp() / (2.0 * PI).sqrt(), f64::NEG_INFINITY, f64::INFINITY, &spec()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-8);
        assert!(est.error <= 1e-10 * 1.0 + 1e-10);
    }

    #[test]
    fn exponential_over_half_line() {
        let est = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-8);
        let est = integrate(|x: f64| x.exp(), f64::NEG_INFINITY, 0.0, &spec()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let a = integrate(|x: f64| x.sin(), 0.0, 2.0, &spec()).unwrap().value;
        let b = integrate(|x: f64| x.sin(), 2.0, 0.0, &spec()).unwrap().value;
        assert!((a + b).abs() < 1e-14);
        assert!((a - (1.0 - 2f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn k1_integral_representation() {
        // K1(x) = int_0^inf exp(-x cosh t) cosh t dt
        let integrand = |t: f64| {
            let c = t.cosh();
            if c > 1e3 {
                0.0
            } else {
                (-c).exp() * c
            }
        };
        let k1 = integrate(integrand, 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((k1.value - 0.601_907_230_2).abs() < 1e-9);
        assert!((k1.value - super::super::bessel_k1(1.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn non_convergence_reports_best_estimate() {
        let tight = QuadratureSpec::new(1e-15, 1e-15, 3).unwrap();
        let err = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &tight).unwrap_err();
        match err {
            CrateError::Integration(IntegrationError::NoConvergence { estimate, error_bound, subdivisions }) => {
                assert_eq!(subdivisions, 3);
                assert!(error_bound > 0.0);
                assert!((estimate - 2.0).abs() < 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let err = integrate(|x: f64| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0, &spec()).unwrap_err();
        assert!(matches!(err, CrateError::Integration(IntegrationError::NonFinite { .. })));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-8, 0).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-8, 1).is_ok());
    }

    #[test]
    fn integration_is_linear() {
        let f = |x: f64| (-x * x).exp();
        let g = |x: f64| 1.0 / (1.0 + x * x);
        let (a, b) = (2.5, -0.75);
        let lin = integrate(|x| a * f(x) + b * g(x), f64::NEG_INFINITY, f64::INFINITY, &spec()).unwrap();
        let fi = integrate(f, f64::NEG_INFINITY, f64::INFINITY, &spec()).unwrap();
        let gi = integrate(g, f64::NEG_INFINITY, f64::INFINITY, &spec()).unwrap();
        let tol = lin.error + a.abs() * fi.error + b.abs() * gi.error + 1e-12;
        assert!((lin.value - (a * fi.value + b * gi.value)).abs() <= tol);
        assert!((gi.value - PI).abs() < 1e-8);
    }
}
