//! Synthetic market data and the Monte Carlo sampling floor of the
//! variation measure under constant return laws.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data_ingest::MarketQuadruple;
use crate::distributions::{NcigParams, NigParams};
use crate::error::{Error, Result};
use crate::variation::{run_pipeline, FitFailurePolicy, LawParams, Model, PipelineOptions};

/// Starting stock index level.
pub const STOCK_BASE: f64 = 100.0;
/// Starting 10-year yield, percent.
pub const YIELD_BASE: f64 = 2.5;
/// Trailing window of the `FromLaw` volatility columns.
pub const VOL_LOOKBACK: usize = 21;

impl LawParams {
    pub fn model(&self) -> Model {
        match self {
            LawParams::Nig(_) => Model::Nig,
            LawParams::Ncig(_) => Model::Ncig,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            LawParams::Nig(p) => p.moments().mean,
            LawParams::Ncig(p) => p.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            LawParams::Nig(p) => p.moments().variance,
            LawParams::Ncig(p) => p.variance(),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match self {
            LawParams::Nig(p) => p.sample_with(rng, n),
            LawParams::Ncig(p) => p.sample_with(rng, n),
        }
    }
}

/// Source of the implied-volatility columns of a generated quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VolSeriesMode {
    /// The annualized standard deviation of each generating law.
    #[default]
    Constant,
    /// Annualized trailing sample volatility of the generated returns.
    FromLaw,
    /// Mean-reverting log-volatility paths independent of the returns, so
    /// the normal model sees time-varying volatility while the return laws
    /// stay fixed.
    PaperMimic,
}

impl fmt::Display for VolSeriesMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VolSeriesMode::Constant => "constant",
            VolSeriesMode::FromLaw => "from_law",
            VolSeriesMode::PaperMimic => "paper_mimic",
        })
    }
}

impl FromStr for VolSeriesMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "constant" => Ok(VolSeriesMode::Constant),
            "from_law" => Ok(VolSeriesMode::FromLaw),
            "paper_mimic" => Ok(VolSeriesMode::PaperMimic),
            other => Err(Error::Parse(format!("unknown volatility mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticScenario {
    pub stock_law: LawParams,
    pub bond_law: LawParams,
    pub n_days: usize,
    pub seed: u64,
    pub vol_series_mode: VolSeriesMode,
    pub annualization_days: u32,
}

impl SyntheticScenario {
    pub fn new(stock_law: LawParams, bond_law: LawParams, n_days: usize, seed: u64) -> Self {
        Self { stock_law, bond_law, n_days, seed, vol_series_mode: VolSeriesMode::Constant, annualization_days: 365 }
    }

    /// Default NIG laws: a daily equity law with mild negative skew and a
    /// symmetric law for daily log changes of the yield.
    pub fn default_nig(n_days: usize, seed: u64) -> Self {
        Self::new(
            LawParams::Nig(NigParams::new(0.0003, 40.0, -2.0, 0.012).expect("valid law")),
            LawParams::Nig(NigParams::new(0.0, 30.0, 0.0, 0.012).expect("valid law")),
            n_days,
            seed,
        )
    }

    /// Default NCIG laws with daily-scale spreads.
    pub fn default_ncig(n_days: usize, seed: u64) -> Self {
        Self::new(
            LawParams::Ncig(NcigParams::new(0.0003, 2.0, 1.0, 0.01).expect("valid law")),
            LawParams::Ncig(NcigParams::new(0.0, 3.0, 1.0, 0.02).expect("valid law")),
            n_days,
            seed,
        )
    }

    /// Five years of business days with the default NIG laws and
    /// mean-reverting implied-volatility paths.
    pub fn paper_mimic(seed: u64) -> Self {
        Self { vol_series_mode: VolSeriesMode::PaperMimic, ..Self::default_nig(1258, seed) }
    }
}

/// First synthetic date.
pub fn first_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2014, 1, 2).expect("valid date")
}

/// `n` consecutive weekdays starting at [`first_date`].
pub fn business_days(n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = first_date();
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn cumulative_levels(base: f64, returns: &[f64]) -> Vec<f64> {
    let mut levels = Vec::with_capacity(returns.len() + 1);
    let mut log_level = base.ln();
    levels.push(base);
    for r in returns {
        log_level += r;
        levels.push(log_level.exp());
    }
    levels
}

fn trailing_vol(returns: &[f64], law_sd: f64, days: f64) -> Vec<f64> {
    let annualize = 100.0 * days.sqrt();
    (0..=returns.len())
        .map(|i| {
            if i < VOL_LOOKBACK {
                return annualize * law_sd;
            }
            let w = &returns[i - VOL_LOOKBACK..i];
            let m = w.iter().sum::<f64>() / w.len() as f64;
            let var = w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (w.len() - 1) as f64;
            annualize * var.sqrt()
        })
        .collect()
}

/// `level * exp(x)` where `x` is a stationary AR(1) in logs with the given
/// daily persistence and stationary standard deviation.
fn log_ar_path<R: Rng>(rng: &mut R, n: usize, level: f64, persistence: f64, stationary_sd: f64) -> Vec<f64> {
    let shock_sd = stationary_sd * (1.0 - persistence * persistence).sqrt();
    let mut x = stationary_sd * rng.sample::<f64, _>(StandardNormal);
    (0..n)
        .map(|_| {
            let v = level * x.exp();
            x = persistence * x + shock_sd * rng.sample::<f64, _>(StandardNormal);
            v
        })
        .collect()
}

/// The daily stock and bond returns behind [`generate_scenario`], each of
/// length `n_days - 1`.
pub fn generate_returns(s: &SyntheticScenario) -> (Vec<f64>, Vec<f64>) {
    let n = s.n_days.saturating_sub(1);
    (s.stock_law.sample_with(&mut rng(s.seed, 0), n), s.bond_law.sample_with(&mut rng(s.seed, 1), n))
}

/// Builds a quadruple from the scenario. Stock levels start at 100 and the
/// yield at 2.5; both evolve by exponentiated sums of draws from their
/// laws. The same scenario always yields the same quadruple.
pub fn generate_scenario(s: &SyntheticScenario) -> Result<MarketQuadruple> {
    if s.n_days < 2 {
        return Err(Error::InsufficientData { needed: 2, got: s.n_days });
    }
    if s.annualization_days == 0 {
        return Err(Error::InvalidParameter("annualization days must be positive".into()));
    }
    let n = s.n_days;
    let (stock_returns, bond_returns) = generate_returns(s);
    let days = s.annualization_days as f64;
    let annualized = |law: &LawParams| 100.0 * (law.variance() * days).sqrt();
    let (vix, tyvix) = match s.vol_series_mode {
        VolSeriesMode::Constant => (vec![annualized(&s.stock_law); n], vec![annualized(&s.bond_law); n]),
        VolSeriesMode::FromLaw => (
            trailing_vol(&stock_returns, s.stock_law.variance().sqrt(), days),
            trailing_vol(&bond_returns, s.bond_law.variance().sqrt(), days),
        ),
        VolSeriesMode::PaperMimic => {
            let mut r = rng(s.seed, 2);
            (log_ar_path(&mut r, n, 15.0, 0.98, 0.3), log_ar_path(&mut r, n, 4.5, 0.98, 0.2))
        }
    };
    MarketQuadruple::new(
        business_days(n),
        cumulative_levels(STOCK_BASE, &stock_returns),
        vix,
        cumulative_levels(YIELD_BASE, &bond_returns),
        tyvix,
    )
}

/// Settings of a sampling-floor experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorSpec {
    pub stock_law: LawParams,
    pub bond_law: LawParams,
    pub n_days: usize,
    pub replications: usize,
    pub seed: u64,
    pub pipeline: PipelineOptions,
}

pub const MIN_REPLICATIONS: usize = 100;
pub const FLOOR_PERCENTILE: f64 = 0.99;

impl FloorSpec {
    /// 200 replications of 600 days with 252-day windows; failed windows
    /// are carried forward so a single hard window cannot end a replication.
    pub fn new(stock_law: LawParams, bond_law: LawParams, seed: u64) -> Self {
        Self {
            stock_law,
            bond_law,
            n_days: 600,
            replications: 200,
            seed,
            pipeline: PipelineOptions { policy: FitFailurePolicy::CarryForward, ..PipelineOptions::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorEstimate {
    /// Nearest-rank percentile of the per-replication maxima.
    pub floor: f64,
    /// Largest rolling variance of each replication, in replication order.
    pub maxima: Vec<f64>,
    /// Windows whose fits were carried forward, summed over replications.
    pub carried_windows: usize,
}

/// Nearest-rank percentile: the smallest value with at least `q n` of the
/// sample at or below it.
pub fn nearest_rank(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Monte Carlo 99th percentile of the maximum rolling variance when both
/// return laws are constant. Replication `r` generates its data and seeds
/// its fits with `seed + r`.
pub fn sampling_floor(spec: &FloorSpec) -> Result<FloorEstimate> {
    if spec.replications < MIN_REPLICATIONS {
        return Err(Error::InvalidParameter(format!(
            "the floor needs at least {MIN_REPLICATIONS} replications, got {}",
            spec.replications
        )));
    }
    let model = spec.stock_law.model();
    if spec.bond_law.model() != model {
        return Err(Error::InvalidParameter("stock and bond laws must come from the same family".into()));
    }
    let runs: Vec<(f64, usize)> = (0..spec.replications as u64)
        .into_par_iter()
        .map(|r| {
            let seed = spec.seed.wrapping_add(r);
            let scenario = SyntheticScenario::new(spec.stock_law, spec.bond_law, spec.n_days, seed);
            let data = generate_scenario(&scenario)?;
            let out = run_pipeline(model, &data, &PipelineOptions { seed, ..spec.pipeline })?;
            let carried = out.fits.iter().filter(|f| f.carried_forward).count() / 2;
            Ok((out.variation.max(), carried))
        })
        .collect::<Result<_>>()?;
    let maxima: Vec<f64> = runs.iter().map(|r| r.0).collect();
    Ok(FloorEstimate {
        floor: nearest_rank(&maxima, FLOOR_PERCENTILE),
        carried_windows: runs.iter().map(|r| r.1).sum(),
        maxima,
    })
}
