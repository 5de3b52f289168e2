//! Report rows and their CSV / JSON encodings.
//!
//! Summaries hold one row per (episode, policy). Series files are long
//! format, one row per (episode, policy, slot, metric), ready for plotting.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub date: String,
    pub season: String,
    pub policy: String,
    pub alpha: f64,
    pub pi_star: f64,
    pub cost: f64,
    pub dissatisfaction: f64,
    pub objective: f64,
    pub opt_objective: f64,
    /// `η^T / OPT(T)`.
    pub ratio: f64,
    /// `Σv / c`, in `[0, 1]`.
    pub charged_pct: f64,
    pub charged_kwh: f64,
}

impl SummaryRow {
    pub const HEADER: [&'static str; 12] = [
        "date",
        "season",
        "policy",
        "alpha",
        "pi_star",
        "cost",
        "dissatisfaction",
        "objective",
        "opt_objective",
        "ratio",
        "charged_pct",
        "charged_kwh",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub date: String,
    pub policy: String,
    pub slot: usize,
    pub metric: String,
    pub value: f64,
}

impl SeriesRow {
    pub const HEADER: [&'static str; 5] = ["date", "policy", "slot", "metric", "value"];
}

/// Means per (season, policy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub season: String,
    pub policy: String,
    pub episodes: usize,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub mean_objective: f64,
    pub mean_charged_pct: f64,
}

impl CompareRow {
    pub const HEADER: [&'static str; 7] = [
        "season",
        "policy",
        "episodes",
        "mean_ratio",
        "max_ratio",
        "mean_objective",
        "mean_charged_pct",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub alpha_multiple: f64,
    pub alpha: f64,
    pub pi_star: f64,
    pub policy: String,
    pub episodes: usize,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub charged_pct: f64,
    pub opt_charged_pct: f64,
}

impl AlphaRow {
    pub const HEADER: [&'static str; 9] = [
        "alpha_multiple",
        "alpha",
        "pi_star",
        "policy",
        "episodes",
        "mean_ratio",
        "max_ratio",
        "charged_pct",
        "opt_charged_pct",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub rate_factor: f64,
    /// Capacity in units of the scaled per-slot cap.
    pub capacity: String,
    pub pi_star: f64,
    pub policy: String,
    pub episodes: usize,
    /// Objectives in units of the nominal per-slot cap.
    pub mean_objective: f64,
    pub mean_opt_objective: f64,
}

impl RateRow {
    pub const HEADER: [&'static str; 7] = [
        "rate_factor",
        "capacity",
        "pi_star",
        "policy",
        "episodes",
        "mean_objective",
        "mean_opt_objective",
    ];
}

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("format must be csv or json, got `{other}`"))),
        }
    }
}

impl Format {
    /// Guesses from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Writes `rows` as CSV with `header`; an empty slice gives a header-only file.
pub fn write_csv<W: Write, T: Serialize>(writer: W, header: &[&str], rows: &[T]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn read_csv<R: Read, T: DeserializeOwned>(reader: R) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_json<W: Write, T: Serialize>(mut writer: W, rows: &[T]) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut writer, rows)?;
    writer.write_all(b"\n")?;
    writer.flush()
}

/// Encodes rows in the requested format.
pub fn encode<T: Serialize>(format: Format, header: &[&str], rows: &[T]) -> Vec<u8> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&mut buf, header, rows),
        Format::Json => write_json(&mut buf, rows),
    }
    .expect("writing to memory cannot fail");
    buf
}

pub fn write_file<T: Serialize>(path: &Path, format: Format, header: &[&str], rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, encode(format, header, rows)).map_err(|e| Error::io(path, e))
}

/// Reads summary rows from a CSV or JSON file, chosen by extension.
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let parsed = match Format::from_path(path) {
        Format::Json => serde_json::from_slice(&bytes).map_err(|e| e.to_string()),
        Format::Csv => read_csv(bytes.as_slice()).map_err(|e| e.to_string()),
    };
    parsed.map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

/// Means per (season, policy); with `by_season` off every row falls in the
/// bucket `all`. Sorted by season, then policy.
pub fn aggregate(rows: &[SummaryRow], by_season: bool) -> Vec<CompareRow> {
    let mut groups: BTreeMap<(String, String), Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        let season = if by_season { r.season.clone() } else { "all".into() };
        groups.entry((season, r.policy.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((season, policy), rs)| {
            let n = rs.len() as f64;
            CompareRow {
                season,
                policy,
                episodes: rs.len(),
                mean_ratio: rs.iter().map(|r| r.ratio).sum::<f64>() / n,
                max_ratio: rs.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max),
                mean_objective: rs.iter().map(|r| r.objective).sum::<f64>() / n,
                mean_charged_pct: rs.iter().map(|r| r.charged_pct).sum::<f64>() / n,
            }
        })
        .collect()
}
