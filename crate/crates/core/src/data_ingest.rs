//! Loading, validating and writing the daily market quadruple
//! (index level, equity implied vol, 10-year yield, Treasury implied vol).

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Synchronized daily observations of the four market series.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketQuadruple {
    dates: Vec<NaiveDate>,
    spx: Vec<f64>,
    vix: Vec<f64>,
    yield10: Vec<f64>,
    tyvix: Vec<f64>,
}

impl MarketQuadruple {
    /// Validates equal lengths, strictly increasing dates, finite values
    /// and positive index and volatility levels.
    pub fn new(dates: Vec<NaiveDate>, spx: Vec<f64>, vix: Vec<f64>, yield10: Vec<f64>, tyvix: Vec<f64>) -> Result<Self> {
        let n = dates.len();
        for (name, col) in [("spx", &spx), ("vix", &vix), ("yield10", &yield10), ("tyvix", &tyvix)] {
            if col.len() != n {
                return Err(Error::LengthMismatch(format!("{name} has {} values for {n} dates", col.len())));
            }
        }
        if let Some(i) = dates.windows(2).position(|d| d[0] >= d[1]) {
            return Err(Error::Parse(format!("dates not strictly increasing at {}", dates[i + 1])));
        }
        for (name, col, positive) in
            [("spx", &spx, true), ("vix", &vix, true), ("yield10", &yield10, false), ("tyvix", &tyvix, true)]
        {
            if let Some(i) = col.iter().position(|&v| !v.is_finite() || (positive && v <= 0.0)) {
                return Err(Error::Domain(format!("{name} on {} is {}; must be finite{}", dates[i], col[i], if positive { " and positive" } else { "" })));
            }
        }
        Ok(Self { dates, spx, vix, yield10, tyvix })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn spx(&self) -> &[f64] {
        &self.spx
    }

    pub fn vix(&self) -> &[f64] {
        &self.vix
    }

    pub fn yield10(&self) -> &[f64] {
        &self.yield10
    }

    pub fn tyvix(&self) -> &[f64] {
        &self.tyvix
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

/// Header names of the five logical columns and the field delimiter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub date: String,
    pub spx: String,
    pub vix: String,
    pub yield10: String,
    pub tyvix: String,
    pub delimiter: u8,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "date".into(),
            spx: "spx_close".into(),
            vix: "vix_close".into(),
            yield10: "ust10y_yield".into(),
            tyvix: "tyvix_close".into(),
            delimiter: b',',
        }
    }
}

/// Rows read and rows discarded for a missing field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
}

const MISSING: [&str; 7] = ["", "na", "n/a", "nan", "null", "#n/a", "."];

fn is_missing(field: &str) -> bool {
    let f = field.trim().to_ascii_lowercase();
    MISSING.contains(&f.as_str())
}

pub fn load_quadruple(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<(MarketQuadruple, IngestReport)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_quadruple(file, mapping)
}

/// Parses delimited text with a header row. Rows with any missing field
/// are dropped and counted; any other unreadable field is an error.
pub fn read_quadruple<R: Read>(reader: R, mapping: &ColumnMapping) -> Result<(MarketQuadruple, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(mapping.delimiter).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column '{name}'")))
    };
    let idx = [
        column(&mapping.date)?,
        column(&mapping.spx)?,
        column(&mapping.vix)?,
        column(&mapping.yield10)?,
        column(&mapping.tyvix)?,
    ];
    let mut report = IngestReport::default();
    let mut rows: Vec<(NaiveDate, [f64; 4])> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        report.rows_read += 1;
        let fields: Vec<&str> = idx.iter().map(|&i| record.get(i).unwrap_or("")).collect();
        if fields.iter().any(|f| is_missing(f)) {
            report.rows_dropped += 1;
            continue;
        }
        let row = line + 2;
        let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d")
            .map_err(|e| Error::Parse(format!("row {row}: date '{}': {e}", fields[0])))?;
        let mut values = [0.0; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            values[k] = f.parse().map_err(|e| Error::Parse(format!("row {row}: value '{f}': {e}")))?;
        }
        rows.push((date, values));
    }
    rows.sort_by_key(|r| r.0);
    let mut seen = HashSet::new();
    if let Some((d, _)) = rows.iter().find(|r| !seen.insert(r.0)) {
        return Err(Error::Parse(format!("duplicate date {d}")));
    }
    let col = |k: usize| rows.iter().map(|r| r.1[k]).collect::<Vec<_>>();
    let quad = MarketQuadruple::new(rows.iter().map(|r| r.0).collect(), col(0), col(1), col(2), col(3))?;
    Ok((quad, report))
}

/// Writes the quadruple with the mapping's headers. Floats use the shortest
/// representation that parses back to the same value, so a reload is exact.
pub fn write_quadruple<W: Write>(writer: W, quad: &MarketQuadruple, mapping: &ColumnMapping) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(mapping.delimiter).from_writer(writer);
    w.write_record([&mapping.date, &mapping.spx, &mapping.vix, &mapping.yield10, &mapping.tyvix])?;
    for i in 0..quad.len() {
        w.write_record([
            quad.dates[i].format("%Y-%m-%d").to_string(),
            quad.spx[i].to_string(),
            quad.vix[i].to_string(),
            quad.yield10[i].to_string(),
            quad.tyvix[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_quadruple(path: impl AsRef<Path>, quad: &MarketQuadruple, mapping: &ColumnMapping) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_quadruple(std::io::BufWriter::new(file), quad, mapping)
}

/// `r_j = ln(levels[j + 1] / levels[j])`.
pub fn log_returns(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: levels.len() });
    }
    if let Some(i) = levels.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("level {} at index {i} is not positive", levels[i])));
    }
    Ok(levels.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// First differences `levels[j + 1] - levels[j]`.
pub fn differences(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: levels.len() });
    }
    Ok(levels.windows(2).map(|w| w[1] - w[0]).collect())
}
