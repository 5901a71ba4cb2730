use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use excessvol::distributions::{NcigParams, NigParams};
use excessvol::estimation::{DEFAULT_ECF_GRID_MAX, DEFAULT_ECF_GRID_SIZE, MIN_WINDOW};
use excessvol::simulation::{SyntheticScenario, VolSeriesMode};
use excessvol::variation::{BondReturns, Eq20Variant, FitFailurePolicy, LawParams, Model, PipelineOptions};

use crate::{CliError, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fit,
    Variation,
    Simulate,
    Floor,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Fit => "fit",
            Command::Variation => "variation",
            Command::Simulate => "simulate",
            Command::Floor => "floor",
        })
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fit" => Ok(Command::Fit),
            "variation" => Ok(Command::Variation),
            "simulate" => Ok(Command::Simulate),
            "floor" => Ok(Command::Floor),
            other => Err(format!("unknown command '{other}' (expected fit, variation, simulate or floor)")),
        }
    }
}

/// A return law written as `nig:mu,alpha,beta,delta` or `ncig:mu,alpha,beta,delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawSpec(pub LawParams);

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [mu, alpha, beta, delta] = self.0.values();
        let family = match self.0 {
            LawParams::Nig(_) => "nig",
            LawParams::Ncig(_) => "ncig",
        };
        write!(f, "{family}:{mu},{alpha},{beta},{delta}")
    }
}

impl FromStr for LawSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (family, rest) = s.split_once(':').ok_or_else(|| format!("law '{s}' must look like nig:mu,alpha,beta,delta"))?;
        let v: Vec<f64> = rest
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("law '{s}': {e}")))
            .collect::<Result<_, _>>()?;
        let [mu, alpha, beta, delta] = v[..] else {
            return Err(format!("law '{s}' needs four parameters"));
        };
        let law = match family {
            "nig" => LawParams::Nig(NigParams::new(mu, alpha, beta, delta).map_err(|e| e.to_string())?),
            "ncig" => LawParams::Ncig(NcigParams::new(mu, alpha, beta, delta).map_err(|e| e.to_string())?),
            other => return Err(format!("unknown law family '{other}' (expected nig or ncig)")),
        };
        Ok(LawSpec(law))
    }
}

/// Command-line flags. Everything except `--output` may instead come from
/// a manifest written by an earlier run.
#[derive(Debug, Parser)]
#[command(name = "excessvol", version, about = "Rolling excess-return variation under normal, NIG and NCIG laws")]
pub struct Args {
    /// fit, variation, simulate or floor.
    #[arg(long)]
    pub command: Option<Command>,
    /// normal, nig or ncig.
    #[arg(long)]
    pub model: Option<String>,
    /// Input CSV with date, spx_close, vix_close, ust10y_yield, tyvix_close.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long)]
    pub output: PathBuf,
    /// Window length in trading days.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub annualization_days: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// verbatim or corrected.
    #[arg(long)]
    pub eq20_variant: Option<String>,
    /// abort or carry_forward (default: abort, carry_forward for floor).
    #[arg(long)]
    pub fit_failure_policy: Option<String>,
    #[arg(long)]
    pub ecf_grid_size: Option<usize>,
    #[arg(long)]
    pub ecf_grid_max: Option<f64>,
    /// log_change or level_difference.
    #[arg(long)]
    pub bond_returns: Option<String>,
    #[arg(long)]
    pub nig_restarts: Option<usize>,
    #[arg(long)]
    pub ncig_restarts: Option<usize>,
    /// Days to simulate (simulate, floor).
    #[arg(long)]
    pub n_days: Option<usize>,
    /// Monte Carlo replications (floor).
    #[arg(long)]
    pub replications: Option<usize>,
    /// constant, from_law or paper_mimic (simulate).
    #[arg(long)]
    pub vol_mode: Option<String>,
    /// Stock law for simulate and floor, e.g. nig:0.0003,40,-2,0.012.
    #[arg(long)]
    pub stock_law: Option<LawSpec>,
    /// Bond law for simulate and floor.
    #[arg(long)]
    pub bond_law: Option<LawSpec>,
    /// Factor applied to an extra scaled column of variation.csv.
    #[arg(long)]
    pub display_multiplier: Option<f64>,
    /// Rerun the configuration recorded in this manifest.
    #[arg(long, conflicts_with_all = [
        "command", "model", "input", "window", "annualization_days", "seed", "eq20_variant",
        "fit_failure_policy", "ecf_grid_size", "ecf_grid_max", "bond_returns", "nig_restarts",
        "ncig_restarts", "n_days", "replications", "vol_mode", "stock_law", "bond_law", "display_multiplier",
    ])]
    pub manifest: Option<PathBuf>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Model,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub window_length: usize,
    pub annualization_days: u32,
    pub seed: u64,
    pub eq20_variant: Eq20Variant,
    pub fit_failure_policy: FitFailurePolicy,
    pub ecf_grid_size: usize,
    pub ecf_grid_max: f64,
    pub bond_returns: BondReturns,
    pub nig_restarts: usize,
    pub ncig_restarts: usize,
    pub n_days: usize,
    pub replications: usize,
    pub vol_mode: VolSeriesMode,
    pub stock_law: LawSpec,
    pub bond_law: LawSpec,
    pub display_multiplier: f64,
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError::new(Stage::Config, message)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| config_error(format!("{key}: {e}")))
}

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        if let Some(path) = &args.manifest {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error(format!("manifest {}: {e}", path.display())))?;
            let mut config = Self::from_manifest(&text)?;
            config.output = args.output.clone();
            return Ok(config);
        }
        let command = args.command.ok_or_else(|| config_error("--command is required without --manifest"))?;
        let model: Model = match &args.model {
            Some(m) => parse("model", m)?,
            None => Model::Nig,
        };
        let default_laws = match model {
            Model::Ncig => SyntheticScenario::default_ncig(0, 0),
            _ => SyntheticScenario::default_nig(0, 0),
        };
        let policy = match &args.fit_failure_policy {
            Some(p) => parse("fit_failure_policy", p)?,
            None if command == Command::Floor => FitFailurePolicy::CarryForward,
            None => FitFailurePolicy::Abort,
        };
        let defaults = PipelineOptions::default();
        let config = Self {
            command,
            model,
            input: args.input.clone(),
            output: args.output.clone(),
            window_length: args.window.unwrap_or(defaults.window_length),
            annualization_days: args.annualization_days.unwrap_or(defaults.annualization_days),
            seed: args.seed.unwrap_or(0),
            eq20_variant: args.eq20_variant.as_deref().map(|v| parse("eq20_variant", v)).transpose()?.unwrap_or_default(),
            fit_failure_policy: policy,
            ecf_grid_size: args.ecf_grid_size.unwrap_or(DEFAULT_ECF_GRID_SIZE),
            ecf_grid_max: args.ecf_grid_max.unwrap_or(DEFAULT_ECF_GRID_MAX),
            bond_returns: args.bond_returns.as_deref().map(|v| parse("bond_returns", v)).transpose()?.unwrap_or_default(),
            nig_restarts: args.nig_restarts.unwrap_or(defaults.nig_restarts),
            ncig_restarts: args.ncig_restarts.unwrap_or(defaults.ncig_restarts),
            n_days: args.n_days.unwrap_or(600),
            replications: args.replications.unwrap_or(200),
            vol_mode: args.vol_mode.as_deref().map(|v| parse("vol_mode", v)).transpose()?.unwrap_or_default(),
            stock_law: args.stock_law.unwrap_or(LawSpec(default_laws.stock_law)),
            bond_law: args.bond_law.unwrap_or(LawSpec(default_laws.bond_law)),
            display_multiplier: args.display_multiplier.unwrap_or(1.0),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.window_length < MIN_WINDOW {
            return Err(config_error(format!("--window must be at least {MIN_WINDOW}, got {}", self.window_length)));
        }
        if self.output.as_os_str().is_empty() {
            return Err(config_error("--output must not be empty"));
        }
        let needs_input = matches!(self.command, Command::Fit | Command::Variation);
        match &self.input {
            None if needs_input => return Err(config_error(format!("--input is required for {}", self.command))),
            Some(p) if needs_input && p.as_os_str().is_empty() => return Err(config_error("--input must not be empty")),
            _ => {}
        }
        if matches!(self.command, Command::Fit | Command::Floor) && self.model == Model::Normal {
            return Err(config_error(format!("{} needs a fitted model (nig or ncig)", self.command)));
        }
        if self.command == Command::Floor
            && (self.stock_law.0.model() != self.model || self.bond_law.0.model() != self.model)
        {
            return Err(config_error("floor laws must belong to the --model family"));
        }
        if self.stock_law.0.model() != self.bond_law.0.model() {
            return Err(config_error("stock and bond laws must belong to the same family"));
        }
        if self.annualization_days == 0 {
            return Err(config_error("--annualization-days must be positive"));
        }
        if !(self.display_multiplier.is_finite() && self.display_multiplier > 0.0) {
            return Err(config_error("--display-multiplier must be positive"));
        }
        Ok(())
    }

    pub fn pipeline_options(&self) -> PipelineOptions {
        PipelineOptions {
            window_length: self.window_length,
            annualization_days: self.annualization_days,
            ecf_grid_size: self.ecf_grid_size,
            ecf_grid_max: self.ecf_grid_max,
            policy: self.fit_failure_policy,
            bond_returns: self.bond_returns,
            eq20_variant: self.eq20_variant,
            seed: self.seed,
            nig_restarts: self.nig_restarts,
            ncig_restarts: self.ncig_restarts,
        }
    }

    /// Key-value lines that determine the run, without the output path.
    pub fn manifest_entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("command", self.command.to_string()),
            ("model", self.model.to_string()),
            ("input", self.input.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("window", self.window_length.to_string()),
            ("annualization_days", self.annualization_days.to_string()),
            ("seed", self.seed.to_string()),
            ("eq20_variant", self.eq20_variant.to_string()),
            ("fit_failure_policy", self.fit_failure_policy.to_string()),
            ("ecf_grid_size", self.ecf_grid_size.to_string()),
            ("ecf_grid_max", self.ecf_grid_max.to_string()),
            ("bond_returns", self.bond_returns.to_string()),
            ("nig_restarts", self.nig_restarts.to_string()),
            ("ncig_restarts", self.ncig_restarts.to_string()),
            ("n_days", self.n_days.to_string()),
            ("replications", self.replications.to_string()),
            ("vol_mode", self.vol_mode.to_string()),
            ("stock_law", self.stock_law.to_string()),
            ("bond_law", self.bond_law.to_string()),
            ("display_multiplier", self.display_multiplier.to_string()),
        ]
    }

    /// Parses a manifest. Unknown keys are errors; provenance keys
    /// (`tool`, `version`, `input_sha256`) are checked by the caller.
    pub fn from_manifest(text: &str) -> Result<Self, CliError> {
        let mut map = std::collections::BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
            let (k, v) = line.split_once('=').ok_or_else(|| config_error(format!("manifest line '{line}' has no '='")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |key: &str| map.get(key).cloned().ok_or_else(|| config_error(format!("manifest lacks '{key}'")));
        let input = get("input")?;
        let config = Self {
            command: parse("command", &get("command")?)?,
            model: parse("model", &get("model")?)?,
            input: (!input.is_empty()).then(|| PathBuf::from(input)),
            output: PathBuf::from("."),
            window_length: parse("window", &get("window")?)?,
            annualization_days: parse("annualization_days", &get("annualization_days")?)?,
            seed: parse("seed", &get("seed")?)?,
            eq20_variant: parse("eq20_variant", &get("eq20_variant")?)?,
            fit_failure_policy: parse("fit_failure_policy", &get("fit_failure_policy")?)?,
            ecf_grid_size: parse("ecf_grid_size", &get("ecf_grid_size")?)?,
            ecf_grid_max: parse("ecf_grid_max", &get("ecf_grid_max")?)?,
            bond_returns: parse("bond_returns", &get("bond_returns")?)?,
            nig_restarts: parse("nig_restarts", &get("nig_restarts")?)?,
            ncig_restarts: parse("ncig_restarts", &get("ncig_restarts")?)?,
            n_days: parse("n_days", &get("n_days")?)?,
            replications: parse("replications", &get("replications")?)?,
            vol_mode: parse("vol_mode", &get("vol_mode")?)?,
            stock_law: parse("stock_law", &get("stock_law")?)?,
            bond_law: parse("bond_law", &get("bond_law")?)?,
            display_multiplier: parse("display_multiplier", &get("display_multiplier")?)?,
        };
        let known: Vec<&str> = config.manifest_entries().iter().map(|e| e.0).chain(["tool", "version", "input_sha256"]).collect();
        if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(config_error(format!("unknown manifest key '{k}'")));
        }
        if let Some(sha) = map.get("input_sha256").filter(|s| !s.is_empty()) {
            return config.with_expected_hash(sha);
        }
        Ok(config)
    }

    fn with_expected_hash(self, sha: &str) -> Result<Self, CliError> {
        if let Some(path) = &self.input {
            let actual = crate::file_sha256(path).map_err(|e| CliError::new(Stage::Ingest, e))?;
            if actual != sha {
                return Err(CliError::new(
                    Stage::Ingest,
                    format!("{} has changed since the manifest was written (sha256 {actual}, expected {sha})", path.display()),
                ));
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn law_spec_round_trips() {
        for text in ["nig:0.0003,40,-2,0.012", "ncig:0,3,1,0.02"] {
            let law: LawSpec = text.parse().unwrap();
            assert_eq!(law.to_string(), text);
        }
        assert!("nig:1,2,3".parse::<LawSpec>().is_err());
        assert!("nig:0,1,2,1".parse::<LawSpec>().is_err());
        assert!("gh:0,1,0,1".parse::<LawSpec>().is_err());
    }

    fn args(list: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("excessvol").chain(list.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_follow_the_command() {
        let c = RunConfig::from_args(&args(&["--command", "floor", "--output", "o"])).unwrap();
        assert_eq!(c.fit_failure_policy, FitFailurePolicy::CarryForward);
        assert_eq!((c.window_length, c.annualization_days, c.seed), (252, 365, 0));
        let c = RunConfig::from_args(&args(&["--command", "fit", "--input", "x.csv", "--output", "o"])).unwrap();
        assert_eq!(c.fit_failure_policy, FitFailurePolicy::Abort);
        assert_eq!(c.eq20_variant, Eq20Variant::Verbatim);
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        for list in [
            &["--command", "fit", "--output", "o"][..],
            &["--command", "variation", "--input", "x", "--output", "o", "--window", "59"],
            &["--command", "fit", "--model", "normal", "--input", "x", "--output", "o"],
            &["--command", "floor", "--model", "ncig", "--stock-law", "nig:0,2,0,1", "--output", "o"],
            &["--output", "o"],
        ] {
            assert!(RunConfig::from_args(&args(list)).is_err(), "{list:?}");
        }
    }

    #[test]
    fn manifest_round_trip() {
        let c = RunConfig::from_args(&args(&["--command", "simulate", "--model", "ncig", "--output", "o", "--seed", "9"])).unwrap();
        let text: String = c.manifest_entries().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let back = RunConfig { output: PathBuf::from("o"), ..RunConfig::from_manifest(&text).unwrap() };
        assert_eq!(back, c);
        assert!(RunConfig::from_manifest(&format!("{text}extra=1\n")).is_err());
    }
}
