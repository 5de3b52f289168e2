//! Seeded price corpora so experiments run without external data.
//!
//! Prices are generated for the parking window of each night only, so every
//! generated night slices into one complete episode.

use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{ExperimentConfig, SyntheticModel};
use super::ingest::PriceRow;
use crate::error::{Error, Result};

/// Default lower price level.
pub const SYNTH_P_MIN: f64 = 1.3;
/// Default upper price level (`theta = 4.54`).
pub const SYNTH_P_MAX: f64 = 1.3 * 4.54;

/// First generated night.
pub fn synthetic_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 6, 1).expect("valid date")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams {
    pub model: SyntheticModel,
    pub days: u32,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
}

impl SyntheticParams {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        SyntheticParams {
            model: config.synthetic_model,
            days: config.synthetic_days,
            seed: config.seed,
            lo: SYNTH_P_MIN,
            hi: SYNTH_P_MAX,
        }
    }
}

/// Generates the parking-window prices of `days` consecutive nights.
pub fn generate(params: &SyntheticParams, config: &ExperimentConfig) -> Result<Vec<PriceRow>> {
    if !(params.lo > 0.0 && params.lo < params.hi) {
        return Err(Error::InvalidParameter(format!(
            "synthetic bounds must satisfy 0 < lo < hi, got [{}, {}]",
            params.lo, params.hi
        )));
    }
    let slots = config.slots_per_episode()?;
    let open = config.window_start_time()?;
    let step = Duration::minutes(i64::from(config.slot_minutes));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rows = Vec::with_capacity(slots * params.days as usize);
    for day in 0..params.days {
        let start = (synthetic_start() + Duration::days(i64::from(day))).and_time(open);
        let night = match params.model {
            SyntheticModel::LogUniform => log_uniform(&mut rng, slots, params),
            SyntheticModel::Regime => regime(&mut rng, slots, params),
            SyntheticModel::EveningDecline => evening_decline(&mut rng, slots, params),
        };
        rows.extend(night.into_iter().enumerate().map(|(k, price)| PriceRow {
            timestamp: start + step * k as i32,
            price,
        }));
    }
    Ok(rows)
}

fn log_uniform(rng: &mut ChaCha8Rng, slots: usize, p: &SyntheticParams) -> Vec<f64> {
    let (a, b) = (p.lo.ln(), p.hi.ln());
    (0..slots).map(|_| rng.random_range(a..=b).exp()).collect()
}

/// Two-state Markov chain (cheap / expensive) with log-normal noise.
fn regime(rng: &mut ChaCha8Rng, slots: usize, p: &SyntheticParams) -> Vec<f64> {
    let noise = Normal::new(0.0_f64, 0.12).expect("valid sigma");
    let cheap = p.lo * (p.hi / p.lo).powf(0.25);
    let dear = p.lo * (p.hi / p.lo).powf(0.75);
    let mut high = rng.random_bool(0.5);
    (0..slots)
        .map(|_| {
            if rng.random_bool(0.04) {
                high = !high;
            }
            let level = if high { dear } else { cheap };
            (level * noise.sample(rng).exp()).clamp(p.lo, p.hi)
        })
        .collect()
}

/// Prices that drift down through the night, which punishes charging early.
fn evening_decline(rng: &mut ChaCha8Rng, slots: usize, p: &SyntheticParams) -> Vec<f64> {
    let noise = Normal::new(0.0_f64, 0.08).expect("valid sigma");
    let floor = p.lo * rng.random_range(1.0..1.3);
    let n = slots.max(2) as f64 - 1.0;
    (0..slots)
        .map(|k| {
            let x = k as f64 / n;
            let base = floor + (p.hi - floor) * (1.0 - x).powf(1.5);
            (base * noise.sample(rng).exp()).clamp(p.lo, p.hi)
        })
        .collect()
}

/// Writes rows in the ingest format with naive local timestamps.
pub fn write_prices<W: Write>(writer: W, rows: &[PriceRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "price"])?;
    for r in rows {
        w.write_record([
            r.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string(),
            r.price.to_string(),
        ])?;
    }
    w.flush()
}

pub fn write_price_csv(path: &Path, rows: &[PriceRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_prices(std::io::BufWriter::new(file), rows).map_err(|e| Error::io(path, e))
}
