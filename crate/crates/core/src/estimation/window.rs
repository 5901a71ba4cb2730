use crate::error::{Error, Result};

/// Smallest sample any four-parameter fit accepts.
pub const MIN_WINDOW: usize = 60;

/// A contiguous window of daily log returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnWindow {
    values: Vec<f64>,
    start_index: usize,
}

impl ReturnWindow {
    pub fn new(values: Vec<f64>, start_index: usize) -> Result<Self> {
        if values.len() < MIN_WINDOW {
            return Err(Error::InsufficientData { needed: MIN_WINDOW, got: values.len() });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateData(format!(
                "non-finite return {} at offset {pos}",
                values[pos]
            )));
        }
        if values.iter().all(|&v| v == values[0]) {
            return Err(Error::DegenerateData("all returns in the window are identical".into()));
        }
        Ok(Self { values, start_index })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation with divisor `n - 1`.
    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - m) * (v - m)).sum();
        (ss / (self.len() - 1) as f64).sqrt()
    }
}

/// Sample mean, standard deviation, skewness and excess kurtosis.
pub(crate) fn sample_moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let sd = (m2 * n / (n - 1.0)).sqrt();
    (mean, sd, m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(matches!(
            ReturnWindow::new(vec![0.1; 10], 0),
            Err(Error::InsufficientData { needed: 60, got: 10 })
        ));
        assert!(matches!(ReturnWindow::new(vec![0.1; 80], 0), Err(Error::DegenerateData(_))));
        let mut v: Vec<f64> = (0..80).map(|i| i as f64).collect();
        v[5] = f64::NAN;
        assert!(ReturnWindow::new(v, 0).is_err());
    }

    #[test]
    fn moments_of_a_small_sample() {
        let w = ReturnWindow::new((0..60).map(|i| (i % 2) as f64).collect(), 3).unwrap();
        assert_eq!(w.start_index(), 3);
        assert!((w.mean() - 0.5).abs() < 1e-15);
        assert!((w.std_dev() - (15.0f64 / 59.0).sqrt()).abs() < 1e-15);
        let (_, _, skew, kurt) = sample_moments(w.values());
        assert!(skew.abs() < 1e-12);
        assert!((kurt + 2.0).abs() < 1e-12);
    }
}
