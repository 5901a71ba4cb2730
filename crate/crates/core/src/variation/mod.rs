//! Forecast-difference series and their rolling-window variances.
//!
//! Each model turns a date's information into a difference between the
//! conditional expected log returns of the stock and the bond: `gamma` for
//! the normal model (from implied volatilities), `chi` for the NIG and NCIG
//! models (from per-window fitted parameters). The variation measure is the
//! stride-1 rolling sample variance of that series.

mod pipeline;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::distributions::{shift_correction, NcigParams, NigParams};
use crate::error::{Error, Result};

pub use pipeline::{
    run_pipeline, Asset, BondReturns, FitFailurePolicy, LawParams, PipelineOptions, PipelineOutput, WindowFit,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Normal,
    Nig,
    Ncig,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Normal => "normal",
            Model::Nig => "nig",
            Model::Ncig => "ncig",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(Model::Normal),
            "nig" => Ok(Model::Nig),
            "ncig" => Ok(Model::Ncig),
            other => Err(Error::Parse(format!("unknown model '{other}' (expected normal, nig or ncig)"))),
        }
    }
}

/// Which alpha enters the inner radical of the bond term of the NCIG
/// forecast difference. The printed expression uses the stock's alpha
/// there; `Corrected` uses the bond's own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Eq20Variant {
    #[default]
    Verbatim,
    Corrected,
}

impl fmt::Display for Eq20Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eq20Variant::Verbatim => "verbatim",
            Eq20Variant::Corrected => "corrected",
        })
    }
}

impl FromStr for Eq20Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "verbatim" => Ok(Eq20Variant::Verbatim),
            "corrected" => Ok(Eq20Variant::Corrected),
            other => Err(Error::Parse(format!("unknown variant '{other}' (expected verbatim or corrected)"))),
        }
    }
}

/// Per-date forecast differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSeries {
    model: Model,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ChiSeries {
    pub fn new(model: Model, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::LengthMismatch(format!("{} dates for {} values", dates.len(), values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value {} at index {i}", values[i])));
        }
        Ok(Self { model, dates, values })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Rolling sample variances of a [`ChiSeries`]. `start_offsets[s]` is the
/// 0-based index of the first series element in window `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationSeries {
    model: Model,
    window_length: usize,
    start_offsets: Vec<usize>,
    start_dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl VariationSeries {
    pub fn model(&self) -> Model {
        self.model
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn start_offsets(&self) -> &[usize] {
        &self.start_offsets
    }

    pub fn start_dates(&self) -> &[NaiveDate] {
        &self.start_dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `gamma_u = -(sigma_s/100)^2 / (2 days) + (sigma_b/100)^2 / (2 days)`.
pub fn gamma_series(dates: &[NaiveDate], sigma_s: &[f64], sigma_b: &[f64], annualization_days: u32) -> Result<ChiSeries> {
    if sigma_s.len() != sigma_b.len() || dates.len() != sigma_s.len() {
        return Err(Error::LengthMismatch(format!(
            "{} dates, {} stock vols, {} bond vols",
            dates.len(),
            sigma_s.len(),
            sigma_b.len()
        )));
    }
    if annualization_days == 0 {
        return Err(Error::InvalidParameter("annualization days must be positive".into()));
    }
    for (name, col) in [("stock", sigma_s), ("bond", sigma_b)] {
        if let Some(i) = col.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Domain(format!("{name} volatility level {} at index {i} is not positive", col[i])));
        }
    }
    let scale = 2.0 * annualization_days as f64;
    let values = sigma_s
        .iter()
        .zip(sigma_b)
        .map(|(s, b)| -(s / 100.0).powi(2) / scale + (b / 100.0).powi(2) / scale)
        .collect();
    ChiSeries::new(Model::Normal, dates.to_vec(), values)
}

/// One side of the NIG forecast difference:
/// `delta beta / sqrt(alpha^2 - beta^2) - delta (sqrt(alpha^2 - beta^2) - sqrt(alpha^2 - (beta - 1)^2))`.
pub fn nig_branch(p: &NigParams) -> Result<f64> {
    Ok(p.delta() * p.beta() / p.gamma() - shift_correction(p)?)
}

/// `1 - sqrt(1 - a)` without cancellation for small `a`.
fn one_minus_sqrt(a: f64) -> f64 {
    a / (1.0 + (1.0 - a).sqrt())
}

/// One side of the NCIG forecast difference,
/// `mu alpha^2 - (alpha/beta) (1 - sqrt(1 - 2 beta (1 - sqrt(1 - (2 beta^2 / inner_alpha)(mu + delta^2/2)))))`,
/// with `inner_alpha` supplied separately so the stock's alpha can appear
/// in the bond term.
pub fn ncig_branch(p: &NcigParams, inner_alpha: f64) -> Result<f64> {
    let (mu, alpha, beta, delta) = (p.mu(), p.alpha(), p.beta(), p.delta());
    let a_inner = 2.0 * beta * beta / inner_alpha * (mu + 0.5 * delta * delta);
    if !(a_inner <= 1.0) {
        return Err(Error::Domain(format!("inner radicand {} is negative", 1.0 - a_inner)));
    }
    let a_outer = 2.0 * beta * one_minus_sqrt(a_inner);
    if !(a_outer <= 1.0) {
        return Err(Error::Domain(format!("outer radicand {} is negative", 1.0 - a_outer)));
    }
    Ok(mu * alpha * alpha - alpha / beta * one_minus_sqrt(a_outer))
}

fn check_lengths(dates: usize, stock: usize, bond: usize) -> Result<()> {
    if stock != bond || dates != stock {
        return Err(Error::LengthMismatch(format!("{dates} dates, {stock} stock fits, {bond} bond fits")));
    }
    Ok(())
}

pub fn chi_nig_value(stock: &NigParams, bond: &NigParams) -> Result<f64> {
    Ok(nig_branch(stock)? - nig_branch(bond)?)
}

pub fn chi_ncig_value(stock: &NcigParams, bond: &NcigParams, variant: Eq20Variant) -> Result<f64> {
    let bond_inner = match variant {
        Eq20Variant::Verbatim => stock.alpha(),
        Eq20Variant::Corrected => bond.alpha(),
    };
    Ok(ncig_branch(stock, stock.alpha())? - ncig_branch(bond, bond_inner)?)
}

pub fn chi_nig(dates: &[NaiveDate], stock: &[NigParams], bond: &[NigParams]) -> Result<ChiSeries> {
    check_lengths(dates.len(), stock.len(), bond.len())?;
    let values = stock
        .iter()
        .zip(bond)
        .enumerate()
        .map(|(t, (s, b))| chi_nig_value(s, b).map_err(|e| Error::Domain(format!("index {t}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    ChiSeries::new(Model::Nig, dates.to_vec(), values)
}

pub fn chi_ncig(dates: &[NaiveDate], stock: &[NcigParams], bond: &[NcigParams], variant: Eq20Variant) -> Result<ChiSeries> {
    check_lengths(dates.len(), stock.len(), bond.len())?;
    let values = stock
        .iter()
        .zip(bond)
        .enumerate()
        .map(|(t, (s, b))| chi_ncig_value(s, b, variant).map_err(|e| Error::Domain(format!("index {t}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    ChiSeries::new(Model::Ncig, dates.to_vec(), values)
}

/// Stride-1 rolling sample variance with divisor `T - 1`.
pub fn rolling_variance(chi: &ChiSeries, window_length: usize) -> Result<VariationSeries> {
    if window_length < 2 {
        return Err(Error::InvalidParameter(format!("window length must be at least 2, got {window_length}")));
    }
    if chi.len() < window_length {
        return Err(Error::InsufficientData { needed: window_length, got: chi.len() });
    }
    let count = chi.len() - window_length + 1;
    let values = (0..count)
        .map(|s| {
            // Centering on the first element makes a constant window exactly 0.
            let w = &chi.values[s..s + window_length];
            let mean = w.iter().map(|x| x - w[0]).sum::<f64>() / window_length as f64;
            w.iter().map(|x| (x - w[0] - mean).powi(2)).sum::<f64>() / (window_length - 1) as f64
        })
        .collect();
    Ok(VariationSeries {
        model: chi.model,
        window_length,
        start_offsets: (0..count).collect(),
        start_dates: chi.dates[..count].to_vec(),
        values,
    })
}
