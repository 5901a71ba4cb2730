//! Command-line runs of the excess-return variation pipeline. Every run
//! writes CSV outputs plus a `manifest.txt` from which it can be repeated
//! byte for byte.

mod config;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use excessvol::data_ingest::{load_quadruple, save_quadruple, ColumnMapping, MarketQuadruple};
use excessvol::simulation::{generate_scenario, sampling_floor, FloorSpec, SyntheticScenario, FLOOR_PERCENTILE};
use excessvol::variation::{run_pipeline, Model, PipelineOutput};
use excessvol::Error;
use sha2::{Digest, Sha256};

pub use config::{Args, Command, LawSpec, RunConfig};

pub const MANIFEST: &str = "manifest.txt";
pub const CHI_FILE: &str = "chi.csv";
pub const VARIATION_FILE: &str = "variation.csv";
pub const FITS_FILE: &str = "fits.csv";
pub const QUADRUPLE_FILE: &str = "quadruple.csv";
pub const FLOOR_FILE: &str = "floor.csv";
pub const FLOOR_SUMMARY_FILE: &str = "floor_summary.csv";

/// The part of a run that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Fit,
    Variation,
    Simulate,
    Floor,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Fit => "fit",
            Stage::Variation => "variation",
            Stage::Simulate => "simulate",
            Stage::Floor => "floor",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub stage: Stage,
    pub message: String,
}

impl CliError {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        Self { stage, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

fn output_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::new(Stage::Output, format!("{}: {e}", path.display()))
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Assigns a pipeline error to the stage that caused it.
fn pipeline_error(e: Error) -> CliError {
    let stage = match &e {
        Error::WindowFitFailure { asset, .. } if asset == "chi" => Stage::Variation,
        Error::WindowFitFailure { .. } | Error::FitFailure(_) => Stage::Fit,
        Error::InsufficientData { .. } => Stage::Ingest,
        _ => Stage::Variation,
    };
    let message = match e {
        Error::InsufficientData { needed, got } => format!(
            "fitted models need at least two windows of data ({needed} observations), the input has {got}"
        ),
        other => other.to_string(),
    };
    CliError::new(stage, message)
}

struct Csv {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &str) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| output_error(&path, e))?;
        let mut csv = Self { path, out: BufWriter::new(file) };
        csv.line(header)?;
        Ok(csv)
    }

    fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.out, "{text}").map_err(|e| output_error(&self.path, e))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(|e| output_error(&self.path, e))?;
        Ok(self.path)
    }
}

fn load_input(config: &RunConfig) -> Result<MarketQuadruple, CliError> {
    let path = config.input.as_ref().ok_or_else(|| CliError::new(Stage::Config, "--input is required"))?;
    let (quad, report) =
        load_quadruple(path, &ColumnMapping::default()).map_err(|e| CliError::new(Stage::Ingest, e.to_string()))?;
    if report.rows_dropped > 0 {
        eprintln!("ingest: dropped {} of {} rows with missing fields", report.rows_dropped, report.rows_read);
    }
    if config.model == Model::Normal && quad.len() < 2 * config.window_length {
        eprintln!(
            "ingest: warning: {} rows is fewer than two windows of {}",
            quad.len(),
            config.window_length
        );
    }
    Ok(quad)
}

fn write_fits(dir: &Path, out: &PipelineOutput) -> Result<PathBuf, CliError> {
    let mut csv = Csv::create(
        dir,
        FITS_FILE,
        "window,terminal_date,asset,mu,alpha,beta,delta,objective,converged,iterations,carried_forward",
    )?;
    for f in &out.fits {
        let [mu, alpha, beta, delta] = f.params.values();
        csv.line(&format!(
            "{},{},{},{mu},{alpha},{beta},{delta},{},{},{},{}",
            f.window, f.terminal_date, f.asset, f.objective_value, f.converged, f.iterations, f.carried_forward
        ))?;
    }
    csv.finish()
}

fn write_variation(dir: &Path, out: &PipelineOutput, multiplier: f64) -> Result<Vec<PathBuf>, CliError> {
    let mut chi = Csv::create(dir, CHI_FILE, "date,chi")?;
    for (d, v) in out.chi.dates().iter().zip(out.chi.values()) {
        chi.line(&format!("{d},{v}"))?;
    }
    let scaled = multiplier != 1.0;
    let header = if scaled { "window_start_date,value,scaled_value" } else { "window_start_date,value" };
    let mut var = Csv::create(dir, VARIATION_FILE, header)?;
    for (d, v) in out.variation.start_dates().iter().zip(out.variation.values()) {
        if scaled {
            var.line(&format!("{d},{v},{}", v * multiplier))?;
        } else {
            var.line(&format!("{d},{v}"))?;
        }
    }
    Ok(vec![chi.finish()?, var.finish()?])
}

fn scenario(config: &RunConfig) -> SyntheticScenario {
    SyntheticScenario {
        vol_series_mode: config.vol_mode,
        annualization_days: config.annualization_days,
        ..SyntheticScenario::new(config.stock_law.0, config.bond_law.0, config.n_days, config.seed)
    }
}

fn write_manifest(config: &RunConfig) -> Result<PathBuf, CliError> {
    let path = config.output.join(MANIFEST);
    let hash = match &config.input {
        Some(p) => file_sha256(p).map_err(|e| CliError::new(Stage::Ingest, e))?,
        None => String::new(),
    };
    let mut text = format!("tool=excessvol\nversion={}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in config.manifest_entries() {
        text.push_str(&format!("{k}={v}\n"));
        if k == "input" {
            text.push_str(&format!("input_sha256={hash}\n"));
        }
    }
    std::fs::write(&path, text).map_err(|e| output_error(&path, e))?;
    Ok(path)
}

/// Executes one run and returns the files written, manifest last.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let dir = &config.output;
    std::fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    let mut written = Vec::new();
    match config.command {
        Command::Variation => {
            let data = load_input(config)?;
            let out = run_pipeline(config.model, &data, &config.pipeline_options()).map_err(pipeline_error)?;
            written.extend(write_variation(dir, &out, config.display_multiplier)?);
            if config.model != Model::Normal {
                written.push(write_fits(dir, &out)?);
            }
        }
        Command::Fit => {
            let data = load_input(config)?;
            let out = run_pipeline(config.model, &data, &config.pipeline_options()).map_err(pipeline_error)?;
            written.push(write_fits(dir, &out)?);
        }
        Command::Simulate => {
            let quad = generate_scenario(&scenario(config)).map_err(|e| CliError::new(Stage::Simulate, e.to_string()))?;
            let path = dir.join(QUADRUPLE_FILE);
            let mapping = ColumnMapping::default();
            save_quadruple(&path, &quad, &mapping).map_err(|e| output_error(&path, e))?;
            let (back, report) = load_quadruple(&path, &mapping).map_err(|e| output_error(&path, e))?;
            if back != quad || report.rows_dropped != 0 {
                return Err(output_error(&path, "generated file does not reload to the same quadruple"));
            }
            written.push(path);
        }
        Command::Floor => {
            let spec = FloorSpec {
                stock_law: config.stock_law.0,
                bond_law: config.bond_law.0,
                n_days: config.n_days,
                replications: config.replications,
                seed: config.seed,
                pipeline: config.pipeline_options(),
            };
            let est = sampling_floor(&spec).map_err(|e| CliError::new(Stage::Floor, e.to_string()))?;
            let mut csv = Csv::create(dir, FLOOR_FILE, "replication,seed,max_variation")?;
            for (r, m) in est.maxima.iter().enumerate() {
                csv.line(&format!("{r},{},{m}", config.seed.wrapping_add(r as u64)))?;
            }
            written.push(csv.finish()?);
            let mut summary = Csv::create(dir, FLOOR_SUMMARY_FILE, "key,value")?;
            for (k, v) in [
                ("floor", est.floor.to_string()),
                ("percentile", FLOOR_PERCENTILE.to_string()),
                ("replications", est.maxima.len().to_string()),
                ("carried_windows", est.carried_windows.to_string()),
            ] {
                summary.line(&format!("{k},{v}"))?;
            }
            written.push(summary.finish()?);
        }
    }
    written.push(write_manifest(config)?);
    Ok(written)
}
