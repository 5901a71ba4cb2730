use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;

use super::{
    chi_ncig_value, chi_nig_value, gamma_series, rolling_variance, ChiSeries, Eq20Variant, Model, VariationSeries,
};
use crate::data_ingest::{differences, log_returns, MarketQuadruple};
use crate::distributions::{NcigParams, NigParams};
use crate::error::{Error, Result};
use crate::estimation::{
    fit_ncig_ecf_with, fit_nig_mle_with, EcfSpec, FitOptions, ReturnWindow, DEFAULT_ECF_GRID_MAX, DEFAULT_ECF_GRID_SIZE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitFailurePolicy {
    #[default]
    Abort,
    /// Reuse the last window whose fits and forecast difference succeeded;
    /// failures before the first success reuse that first success.
    CarryForward,
}

impl fmt::Display for FitFailurePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitFailurePolicy::Abort => "abort",
            FitFailurePolicy::CarryForward => "carry_forward",
        })
    }
}

impl FromStr for FitFailurePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "abort" => Ok(FitFailurePolicy::Abort),
            "carry_forward" => Ok(FitFailurePolicy::CarryForward),
            other => Err(Error::Parse(format!("unknown policy '{other}' (expected abort or carry_forward)"))),
        }
    }
}

/// How daily bond returns are formed from the yield series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BondReturns {
    #[default]
    LogChange,
    LevelDifference,
}

impl fmt::Display for BondReturns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BondReturns::LogChange => "log_change",
            BondReturns::LevelDifference => "level_difference",
        })
    }
}

impl FromStr for BondReturns {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "log_change" => Ok(BondReturns::LogChange),
            "level_difference" => Ok(BondReturns::LevelDifference),
            other => Err(Error::Parse(format!("unknown bond return mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Asset {
    Stock,
    Bond,
}

impl fmt::Display for Asset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Asset::Stock => "stock",
            Asset::Bond => "bond",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawParams {
    Nig(NigParams),
    Ncig(NcigParams),
}

impl LawParams {
    /// `(mu, alpha, beta, delta)`.
    pub fn values(&self) -> [f64; 4] {
        match self {
            LawParams::Nig(p) => [p.mu(), p.alpha(), p.beta(), p.delta()],
            LawParams::Ncig(p) => [p.mu(), p.alpha(), p.beta(), p.delta()],
        }
    }
}

/// One fitted window of one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFit {
    pub window: usize,
    pub terminal_date: NaiveDate,
    pub asset: Asset,
    pub params: LawParams,
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Parameters copied from an earlier window after a failure.
    pub carried_forward: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub window_length: usize,
    pub annualization_days: u32,
    pub ecf_grid_size: usize,
    pub ecf_grid_max: f64,
    pub policy: FitFailurePolicy,
    pub bond_returns: BondReturns,
    pub eq20_variant: Eq20Variant,
    pub seed: u64,
    /// Simplex restarts per NIG fit. The polished single run already
    /// reaches the likelihood maximum on typical windows.
    pub nig_restarts: usize,
    /// Simplex restarts per NCIG fit.
    pub ncig_restarts: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            window_length: 252,
            annualization_days: 365,
            ecf_grid_size: DEFAULT_ECF_GRID_SIZE,
            ecf_grid_max: DEFAULT_ECF_GRID_MAX,
            policy: FitFailurePolicy::Abort,
            bond_returns: BondReturns::LogChange,
            eq20_variant: Eq20Variant::Verbatim,
            seed: 0,
            nig_restarts: 0,
            ncig_restarts: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub chi: ChiSeries,
    pub variation: VariationSeries,
    /// Stock and bond fit per window, ordered by window then asset.
    pub fits: Vec<WindowFit>,
}

/// SplitMix64 finalizer, used to give every window and asset its own seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn window_seed(seed: u64, window: usize, asset: Asset) -> u64 {
    mix(mix(seed) ^ mix((window as u64) << 1 | (asset == Asset::Bond) as u64))
}

type Fitted = Result<(LawParams, f64, bool, usize)>;

fn fit_one(model: Model, values: &[f64], start: usize, options: &PipelineOptions, fit_options: &FitOptions) -> Fitted {
    let window = ReturnWindow::new(values.to_vec(), start)?;
    match model {
        Model::Nig => {
            let r = fit_nig_mle_with(&window, fit_options)?;
            Ok((LawParams::Nig(r.params), r.objective_value, r.converged, r.iterations))
        }
        Model::Ncig => {
            let spec = EcfSpec::scaled(window.std_dev(), options.ecf_grid_size, options.ecf_grid_max)?;
            let r = fit_ncig_ecf_with(&window, &spec, fit_options)?;
            Ok((LawParams::Ncig(r.params), r.objective_value, r.converged, r.iterations))
        }
        Model::Normal => unreachable!("the normal model has no per-window fit"),
    }
}

fn chi_value(stock: &LawParams, bond: &LawParams, variant: Eq20Variant) -> Result<f64> {
    match (stock, bond) {
        (LawParams::Nig(s), LawParams::Nig(b)) => chi_nig_value(s, b),
        (LawParams::Ncig(s), LawParams::Ncig(b)) => chi_ncig_value(s, b, variant),
        _ => Err(Error::InvalidParameter("stock and bond fits come from different models".into())),
    }
}

/// Runs one model end to end on a quadruple.
///
/// The normal model uses the implied-volatility columns directly. The NIG
/// and NCIG models fit every stride-1 window of `window_length` daily
/// returns for both assets, form one forecast difference per window
/// (dated at the window's last day), and take the rolling variance of that
/// series with the same window length.
pub fn run_pipeline(model: Model, data: &MarketQuadruple, options: &PipelineOptions) -> Result<PipelineOutput> {
    let t = options.window_length;
    if t < 2 {
        return Err(Error::InvalidParameter(format!("window length must be at least 2, got {t}")));
    }
    if model == Model::Normal {
        let chi = gamma_series(data.dates(), data.vix(), data.tyvix(), options.annualization_days)?;
        let variation = rolling_variance(&chi, t)?;
        return Ok(PipelineOutput { chi, variation, fits: Vec::new() });
    }
    if data.len() < 2 * t {
        return Err(Error::InsufficientData { needed: 2 * t, got: data.len() });
    }
    let stock = log_returns(data.spx())?;
    let bond = match options.bond_returns {
        BondReturns::LogChange => log_returns(data.yield10()).map_err(|e| {
            Error::Domain(format!("bond log returns need positive yields ({e}); use level differences instead"))
        })?,
        BondReturns::LevelDifference => differences(data.yield10())?,
    };
    let n_windows = stock.len() + 1 - t;
    let raw: Vec<(Fitted, Fitted)> = (0..n_windows)
        .into_par_iter()
        .map(|k| {
            let restarts = if model == Model::Nig { options.nig_restarts } else { options.ncig_restarts };
            let opts = |asset| FitOptions { restarts, ..FitOptions::with_seed(window_seed(options.seed, k, asset)) };
            (
                fit_one(model, &stock[k..k + t], k, options, &opts(Asset::Stock)),
                fit_one(model, &bond[k..k + t], k, options, &opts(Asset::Bond)),
            )
        })
        .collect();

    // Each window either yields both fits and its forecast difference, or
    // the stage that failed: an asset's fit, or the difference itself.
    let outcomes: Vec<std::result::Result<_, (String, Error)>> = raw
        .into_iter()
        .map(|(s, b)| {
            let s = s.map_err(|e| (Asset::Stock.to_string(), e))?;
            let b = b.map_err(|e| (Asset::Bond.to_string(), e))?;
            let chi = chi_value(&s.0, &b.0, options.eq20_variant).map_err(|e| ("chi".to_string(), e))?;
            Ok((s, b, chi))
        })
        .collect();
    let first_good = outcomes.iter().position(|o| o.is_ok());
    let failure = |k: usize| {
        let (stage, source) = outcomes[k].as_ref().err().cloned().expect("window k failed");
        Error::WindowFitFailure { asset: stage, window: k, source: Box::new(source) }
    };
    let first_good = match (options.policy, first_good) {
        (FitFailurePolicy::Abort, _) => {
            if let Some(k) = outcomes.iter().position(|o| o.is_err()) {
                return Err(failure(k));
            }
            0
        }
        (FitFailurePolicy::CarryForward, Some(j)) => j,
        (FitFailurePolicy::CarryForward, None) => return Err(failure(0)),
    };

    let mut fits = Vec::with_capacity(2 * n_windows);
    let mut chi_values = Vec::with_capacity(n_windows);
    let mut source = first_good;
    for k in 0..n_windows {
        if outcomes[k].is_ok() {
            source = k;
        }
        let (s, b, chi) = outcomes[source].as_ref().ok().expect("source window succeeded");
        for (asset, f) in [(Asset::Stock, s), (Asset::Bond, b)] {
            fits.push(WindowFit {
                window: k,
                terminal_date: data.dates()[k + t],
                asset,
                params: f.0,
                objective_value: f.1,
                converged: f.2,
                iterations: f.3,
                carried_forward: source != k,
            });
        }
        chi_values.push(*chi);
    }
    let chi = ChiSeries::new(model, data.dates()[t..].to_vec(), chi_values)?;
    let variation = rolling_variance(&chi, t)?;
    Ok(PipelineOutput { chi, variation, fits })
}
