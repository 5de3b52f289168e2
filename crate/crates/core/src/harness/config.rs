use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{FixedOffset, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::online::{parse_policies, PolicyKind};
use crate::problem::Capacity;

/// What to do with prices that fall outside the calibrated range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutOfRange {
    /// Snap to the nearest bound.
    #[default]
    Clamp,
    /// Drop the whole episode.
    Drop,
}

impl FromStr for OutOfRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(OutOfRange::Clamp),
            "drop" => Ok(OutOfRange::Drop),
            other => Err(Error::Config(format!(
                "out_of_range must be `clamp` or `drop`, got `{other}`"
            ))),
        }
    }
}

/// Price model for generated corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticModel {
    LogUniform,
    #[default]
    Regime,
    EveningDecline,
}

impl FromStr for SyntheticModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-uniform" => Ok(SyntheticModel::LogUniform),
            "regime" => Ok(SyntheticModel::Regime),
            "evening-decline" => Ok(SyntheticModel::EveningDecline),
            other => Err(Error::Config(format!(
                "unknown synthetic model `{other}` (log-uniform, regime, evening-decline)"
            ))),
        }
    }
}

/// Experiment settings, read from a flat TOML file and overridable from the
/// command line.
///
/// ```toml
/// prices = "prices.csv"
/// capacity = "24"
/// alpha_multiple = 3.0
/// policies = "fixed,adaptive,int,rat,rhc:0,naive"
/// window_start = "17:00"
/// window_end = "08:00"
/// slot_minutes = 5
/// trim = 0.05
/// utc_offset = "-06:00"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Price CSV; a synthetic corpus is generated when absent.
    pub prices: Option<PathBuf>,
    /// Calibration overrides.
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    /// Absolute dissatisfaction price. Takes precedence over
    /// `alpha_multiple`; `alpha = p_max` when neither is set.
    pub alpha: Option<f64>,
    /// Dissatisfaction price as a multiple of `p_min`.
    pub alpha_multiple: Option<f64>,
    pub capacity: Capacity,
    pub policies: String,
    pub window_start: String,
    pub window_end: String,
    pub slot_minutes: u32,
    /// Fraction trimmed from each tail during calibration.
    pub trim: f64,
    /// Fixed offset used for naive timestamps and for converting offset-aware
    /// ones.
    pub utc_offset: String,
    pub out_of_range: OutOfRange,
    /// Multiples of `p_min`.
    pub alpha_grid: Vec<f64>,
    /// Per-slot rate relative to the nominal charger.
    pub rate_grid: Vec<f64>,
    /// Charger power, for kWh reporting.
    pub charge_kw: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub synthetic_model: SyntheticModel,
    pub synthetic_days: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            prices: None,
            p_min: None,
            p_max: None,
            alpha: None,
            alpha_multiple: None,
            capacity: Capacity::integer(24).expect("24 is a valid capacity"),
            policies: "fixed,adaptive,int,rat,rhc:0,naive".into(),
            window_start: "17:00".into(),
            window_end: "08:00".into(),
            slot_minutes: 5,
            trim: 0.05,
            utc_offset: "+00:00".into(),
            out_of_range: OutOfRange::Clamp,
            alpha_grid: (1..=20).map(f64::from).collect(),
            rate_grid: vec![0.5, 0.75, 1.0, 1.25, 1.5],
            charge_kw: 8.8,
            seed: 7,
            output_dir: PathBuf::from("evcharge-out"),
            synthetic_model: SyntheticModel::Regime,
            synthetic_days: 28,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.trim) {
            return Err(Error::Config(format!("trim must lie in [0, 0.5), got {}", self.trim)));
        }
        if self.slot_minutes == 0 {
            return Err(Error::Config("slot_minutes must be positive".into()));
        }
        let minutes = self.window_minutes()?;
        if minutes % self.slot_minutes != 0 {
            return Err(Error::Config(format!(
                "window of {minutes} minutes is not a whole number of {}-minute slots",
                self.slot_minutes
            )));
        }
        self.offset()?;
        self.policy_kinds()?;
        if !(self.charge_kw > 0.0) {
            return Err(Error::Config("charge_kw must be positive".into()));
        }
        for (name, grid) in [("alpha_grid", &self.alpha_grid), ("rate_grid", &self.rate_grid)] {
            if grid.is_empty() || grid.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::Config(format!("{name} must be a non-empty list of positive numbers")));
            }
        }
        if self.alpha_grid.iter().any(|&m| m < 1.0) {
            return Err(Error::Config("alpha_grid multiples must be >= 1".into()));
        }
        if let (Some(lo), Some(hi)) = (self.p_min, self.p_max) {
            if lo > hi {
                return Err(Error::BoundsInverted { p_min: lo, p_max: hi });
            }
        }
        Ok(())
    }

    pub fn policy_kinds(&self) -> Result<Vec<PolicyKind>> {
        let kinds = parse_policies(&self.policies)?;
        if kinds.is_empty() {
            return Err(Error::Config("no policies selected".into()));
        }
        Ok(kinds)
    }

    pub fn offset(&self) -> Result<FixedOffset> {
        FixedOffset::from_str(&self.utc_offset)
            .map_err(|e| Error::Config(format!("bad utc_offset `{}`: {e}", self.utc_offset)))
    }

    pub fn window_start_time(&self) -> Result<NaiveTime> {
        parse_clock(&self.window_start)
    }

    /// Length of the parking window; equal start and end mean a full day.
    pub fn window_minutes(&self) -> Result<u32> {
        let start = parse_clock(&self.window_start)?;
        let end = parse_clock(&self.window_end)?;
        let mut minutes = (end - start).num_minutes();
        if minutes <= 0 {
            minutes += 24 * 60;
        }
        Ok(minutes as u32)
    }

    pub fn slots_per_episode(&self) -> Result<usize> {
        Ok((self.window_minutes()? / self.slot_minutes) as usize)
    }

    /// Energy delivered by a unit charge in one slot, in kWh.
    pub fn kwh_per_unit(&self) -> f64 {
        self.charge_kw * f64::from(self.slot_minutes) / 60.0
    }

    /// Dissatisfaction price for calibrated bounds.
    pub fn resolve_alpha(&self, p_min: f64, p_max: f64) -> f64 {
        match (self.alpha, self.alpha_multiple) {
            (Some(a), _) => a,
            (None, Some(m)) => m * p_min,
            (None, None) => p_max,
        }
    }
}

fn parse_clock(s: &str) -> Result<NaiveTime> {
    NaiveTime::parse_from_str(s, "%H:%M")
        .map_err(|e| Error::Config(format!("bad clock time `{s}` (expected HH:MM): {e}")))
}

/// Parses a comma-separated list of numbers.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad grid value `{x}`: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_180_slots() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.slots_per_episode().unwrap(), 180);
        assert!((cfg.kwh_per_unit() * 24.0 - 17.6).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip_and_overrides() {
        let text = r#"
            capacity = "3/2"
            alpha_multiple = 2.5
            policies = "int, naive"
            utc_offset = "-06:00"
            out_of_range = "drop"
            rate_grid = [0.5, 1.0]
        "#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.capacity, Capacity::new(3, 2).unwrap());
        assert_eq!(cfg.policy_kinds().unwrap(), vec![PolicyKind::Int, PolicyKind::Naive]);
        assert_eq!(cfg.out_of_range, OutOfRange::Drop);
        assert_eq!(cfg.offset().unwrap().local_minus_utc(), -6 * 3600);
        assert_eq!(cfg.resolve_alpha(2.0, 9.0), 5.0);
        let back: ExperimentConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(toml::from_str::<ExperimentConfig>("nonsense = 1").is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.trim = 0.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.slot_minutes = 7;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.policies = "fixed,greedy".into();
        assert!(matches!(cfg.validate(), Err(Error::UnknownPolicy(_))));
    }

    #[test]
    fn alpha_resolution_order() {
        let mut cfg = ExperimentConfig::default();
        assert_eq!(cfg.resolve_alpha(1.0, 4.0), 4.0);
        cfg.alpha_multiple = Some(3.0);
        assert_eq!(cfg.resolve_alpha(1.5, 4.0), 4.5);
        cfg.alpha = Some(7.0);
        assert_eq!(cfg.resolve_alpha(1.5, 4.0), 7.0);
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.5, 1,1.5").unwrap(), vec![0.5, 1.0, 1.5]);
        assert!(parse_grid("1,x").is_err());
    }
}
