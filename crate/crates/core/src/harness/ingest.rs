use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OutOfRange};
use crate::error::{Error, Result};

/// One parsed CSV row, with the timestamp in the configured local offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRow {
    pub timestamp: NaiveDateTime,
    pub price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Autumn,
}

impl Season {
    /// Meteorological seasons (Dec–Feb is winter).
    pub fn of(date: NaiveDate) -> Season {
        match date.month() {
            12 | 1 | 2 => Season::Winter,
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            _ => Season::Autumn,
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Autumn => "autumn",
        })
    }
}

/// A parking window worth of prices, already inside the calibrated bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    /// Calendar date on which the window opens.
    pub date: NaiveDate,
    pub prices: Vec<f64>,
}

impl Episode {
    pub fn season(&self) -> Season {
        Season::of(self.date)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub p_min: f64,
    pub p_max: f64,
    pub episodes: Vec<Episode>,
    /// Windows with missing or duplicated slots.
    pub dropped_gaps: usize,
    /// Windows dropped for out-of-range prices (drop mode only).
    pub dropped_out_of_range: usize,
    /// Prices snapped to the bounds (clamp mode only).
    pub clamped: usize,
}

/// Reads `timestamp,price` rows. Timestamps are RFC 3339 (converted to the
/// configured offset) or naive `YYYY-MM-DD[T ]HH:MM[:SS]` already in that
/// offset.
pub fn read_price_csv<R: Read>(reader: R, config: &ExperimentConfig) -> Result<Vec<PriceRow>> {
    let offset = config.offset()?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "price" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `timestamp,price`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };
        if record.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", record.len())));
        }
        let timestamp = parse_timestamp(&record[0], &offset)
            .ok_or_else(|| bad(format!("unrecognised timestamp `{}`", &record[0])))?;
        let price: f64 = record[1]
            .parse()
            .map_err(|e| bad(format!("bad price `{}`: {e}", &record[1])))?;
        if !price.is_finite() {
            return Err(bad(format!("price `{}` is not finite", &record[1])));
        }
        rows.push(PriceRow { timestamp, price });
    }
    Ok(rows)
}

fn parse_timestamp(s: &str, offset: &chrono::FixedOffset) -> Option<NaiveDateTime> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(offset).naive_local());
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
}

/// Bounds after dropping `floor(trim·n)` values from each end of the sorted
/// prices.
pub fn calibrate(prices: &[f64], trim: f64) -> Result<(f64, f64)> {
    let mut sorted: Vec<f64> = prices.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cut = (trim * sorted.len() as f64).floor() as usize;
    if sorted.len() <= 2 * cut {
        return Err(Error::EmptyAfterTrim);
    }
    let kept = &sorted[cut..sorted.len() - cut];
    Ok((kept[0], kept[kept.len() - 1]))
}

/// Loads a price file, calibrates the bounds and slices it into episodes.
pub fn ingest_prices(path: &Path, config: &ExperimentConfig) -> Result<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = read_price_csv(std::io::BufReader::new(file), config)?;
    ingest_rows(&rows, config)
}

pub fn ingest_rows(rows: &[PriceRow], config: &ExperimentConfig) -> Result<Ingested> {
    config.validate()?;
    let all: Vec<f64> = rows.iter().map(|r| r.price).collect();
    let (lo, hi) = calibrate(&all, config.trim)?;
    let p_min = config.p_min.unwrap_or(lo);
    let p_max = config.p_max.unwrap_or(hi);
    if p_min > p_max {
        return Err(Error::BoundsInverted { p_min, p_max });
    }
    if !(p_min > 0.0) {
        return Err(Error::NonPositivePrice(p_min));
    }

    let mut by_time: BTreeMap<NaiveDateTime, f64> = BTreeMap::new();
    let mut duplicated: BTreeSet<NaiveDateTime> = BTreeSet::new();
    for r in rows {
        if by_time.insert(r.timestamp, r.price).is_some() {
            duplicated.insert(r.timestamp);
        }
    }
    let (first, last) = match (by_time.keys().next(), by_time.keys().next_back()) {
        (Some(a), Some(b)) => (*a, *b),
        _ => return Err(Error::EmptyAfterTrim),
    };

    let start = config.window_start_time()?;
    let slots = config.slots_per_episode()?;
    let step = Duration::minutes(i64::from(config.slot_minutes));
    let mut out = Ingested {
        p_min,
        p_max,
        episodes: Vec::new(),
        dropped_gaps: 0,
        dropped_out_of_range: 0,
        clamped: 0,
    };
    let mut date = first.date() - Duration::days(1);
    while date <= last.date() {
        let open = date.and_time(start);
        let stamps: Vec<NaiveDateTime> = (0..slots).map(|k| open + step * k as i32).collect();
        let present = stamps.iter().filter(|t| by_time.contains_key(t)).count();
        date += Duration::days(1);
        if present == 0 {
            continue;
        }
        if present < slots || stamps.iter().any(|t| duplicated.contains(t)) {
            out.dropped_gaps += 1;
            continue;
        }
        let raw: Vec<f64> = stamps.iter().map(|t| by_time[t]).collect();
        let outside = raw.iter().filter(|&&p| p < p_min || p > p_max).count();
        if outside > 0 && config.out_of_range == OutOfRange::Drop {
            out.dropped_out_of_range += 1;
            continue;
        }
        out.clamped += outside;
        out.episodes.push(Episode {
            date: open.date(),
            prices: raw.iter().map(|p| p.clamp(p_min, p_max)).collect(),
        });
    }
    if out.dropped_gaps > 0 {
        log::warn!("dropped {} incomplete episode(s)", out.dropped_gaps);
    }
    if out.dropped_out_of_range > 0 {
        log::warn!("dropped {} episode(s) with out-of-range prices", out.dropped_out_of_range);
    }
    Ok(out)
}
