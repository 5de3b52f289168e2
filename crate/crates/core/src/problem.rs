//! Instance model for single-EV charging under real-time prices.
//!
//! Charge quantities are normalized by the maximum energy the charger can
//! deliver in one slot, so a rate-limited schedule satisfies `0 <= v(t) <= 1`.
//! The battery capacity is kept as an exact rational because the
//! divide-and-conquer policies split it into `m` sub-problems of size `1/n`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on normalized charge quantities.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Default slot length, matching a 5-minute real-time market.
pub const DEFAULT_SLOT_MINUTES: u32 = 5;

/// Battery capacity `m/n`, stored in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Capacity {
    num: u64,
    den: u64,
}

impl Capacity {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::ZeroCapacity { num, den });
        }
        let g = num.gcd(&den);
        Ok(Capacity {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(c: u64) -> Result<Self> {
        Self::new(c, 1)
    }

    /// Closest rational to `x` whose denominator does not exceed `max_den`.
    pub fn approximate(x: f64, max_den: u64) -> Result<Self> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "capacity must be positive and finite, got {x}"
            )));
        }
        let max_den = max_den.max(1);
        // continued-fraction convergents, then the best semiconvergent
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut v = x;
        loop {
            let a = v.floor();
            if a > u32::MAX as f64 {
                break;
            }
            let a = a as u64;
            let q2 = q0 + a * q1;
            if q2 > max_den {
                break;
            }
            (p0, q0, p1, q1) = (p1, q1, p0 + a * p1, q2);
            let frac = v - v.floor();
            if frac < 1e-12 {
                break;
            }
            v = 1.0 / frac;
        }
        if q1 == 0 {
            return Self::new(x.round().max(1.0) as u64, 1);
        }
        let k = (max_den - q0) / q1;
        let (sp, sq) = (p0 + k * p1, q0 + k * q1);
        let err_semi = (sp as f64 / sq as f64 - x).abs();
        let err_conv = (p1 as f64 / q1 as f64 - x).abs();
        let (num, den) = if sp > 0 && err_semi < err_conv {
            (sp, sq)
        } else {
            (p1, q1)
        };
        if num == 0 {
            return Err(Error::InvalidParameter(format!(
                "capacity {x} rounds to zero with denominator <= {max_den}"
            )));
        }
        Self::new(num, den)
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn ceil(&self) -> u64 {
        self.num.div_ceil(self.den)
    }

    /// Exact test `k <= m/n`.
    pub fn admits(&self, k: u64) -> bool {
        k as u128 * self.den as u128 <= self.num as u128
    }

    /// Amount `min(1, c - k)` charged in the `k`-th cheapest slot (0-based)
    /// of a rate-limited greedy fill, computed exactly.
    pub fn slot_share(&self, k: u64) -> f64 {
        if self.admits(k + 1) {
            1.0
        } else if self.admits(k) {
            (self.num - k * self.den) as f64 / self.den as f64
        } else {
            0.0
        }
    }

    /// Capacity re-expressed in units of `factor` times the per-slot cap,
    /// i.e. `c / (a/b) = c·b/a`.
    pub fn rescale(&self, factor: Capacity) -> Result<Self> {
        let num = self.num as u128 * factor.den as u128;
        let den = self.den as u128 * factor.num as u128;
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        if num > u64::MAX as u128 || den > u64::MAX as u128 {
            return Err(Error::InvalidParameter("rescaled capacity overflows".into()));
        }
        Self::new(num as u64, den as u64)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Denominator bound used when a real-valued capacity is given.
pub const MAX_CAPACITY_DENOMINATOR: u64 = 10_000;

impl FromStr for Capacity {
    type Err = Error;

    /// Accepts `m`, `m/n`, or a decimal (approximated with denominator at
    /// most [`MAX_CAPACITY_DENOMINATOR`]).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse capacity `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse::<u64>().map_err(|_| bad())?;
            let d = d.trim().parse::<u64>().map_err(|_| bad())?;
            return Capacity::new(n, d);
        }
        if let Ok(n) = s.parse::<u64>() {
            return Capacity::new(n, 1);
        }
        let x = s.parse::<f64>().map_err(|_| bad())?;
        Capacity::approximate(x, MAX_CAPACITY_DENOMINATOR)
    }
}

impl TryFrom<String> for Capacity {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Capacity> for String {
    fn from(c: Capacity) -> String {
        c.to_string()
    }
}

/// Raw, unvalidated instance parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecParams {
    pub p_min: f64,
    pub p_max: f64,
    pub alpha: f64,
    pub capacity: Capacity,
    pub slot_minutes: u32,
}

/// A validated charging instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemSpec {
    p_min: f64,
    p_max: f64,
    alpha: f64,
    capacity: Capacity,
    theta: f64,
    slot_minutes: u32,
}

impl ProblemSpec {
    pub fn new(p_min: f64, p_max: f64, alpha: f64, capacity: Capacity) -> Result<Self> {
        validate_spec(SpecParams {
            p_min,
            p_max,
            alpha,
            capacity,
            slot_minutes: DEFAULT_SLOT_MINUTES,
        })
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }
    pub fn p_max(&self) -> f64 {
        self.p_max
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn capacity(&self) -> Capacity {
        self.capacity
    }
    /// `c` as a float.
    pub fn c(&self) -> f64 {
        self.capacity.as_f64()
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn slot_minutes(&self) -> u32 {
        self.slot_minutes
    }

    pub fn params(&self) -> SpecParams {
        SpecParams {
            p_min: self.p_min,
            p_max: self.p_max,
            alpha: self.alpha,
            capacity: self.capacity,
            slot_minutes: self.slot_minutes,
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        validate_spec(SpecParams {
            alpha,
            ..self.params()
        })
    }

    pub fn with_capacity(&self, capacity: Capacity) -> Result<Self> {
        validate_spec(SpecParams {
            capacity,
            ..self.params()
        })
    }

    pub fn with_slot_minutes(&self, slot_minutes: u32) -> Result<Self> {
        validate_spec(SpecParams {
            slot_minutes,
            ..self.params()
        })
    }

    pub fn contains_price(&self, price: f64) -> bool {
        price >= self.p_min && price <= self.p_max
    }
}

pub fn validate_spec(raw: SpecParams) -> Result<ProblemSpec> {
    let SpecParams {
        p_min,
        p_max,
        alpha,
        capacity,
        slot_minutes,
    } = raw;
    if !(p_min.is_finite() && p_max.is_finite() && alpha.is_finite()) {
        return Err(Error::InvalidParameter(
            "prices and alpha must be finite".into(),
        ));
    }
    if p_min <= 0.0 {
        return Err(Error::NonPositivePrice(p_min));
    }
    if p_min > p_max {
        return Err(Error::BoundsInverted { p_min, p_max });
    }
    if alpha < p_min {
        return Err(Error::AlphaBelowPMin { alpha, p_min });
    }
    let capacity = Capacity::new(capacity.numer(), capacity.denom())?;
    if slot_minutes == 0 {
        return Err(Error::InvalidParameter("slot length must be positive".into()));
    }
    Ok(ProblemSpec {
        p_min,
        p_max,
        alpha,
        capacity,
        theta: p_max / p_min,
        slot_minutes,
    })
}

/// Prices of one charging episode, one per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTrace {
    prices: Vec<f64>,
}

impl PriceTrace {
    /// Checks every price against the bounds of `spec`.
    pub fn new(prices: Vec<f64>, spec: &ProblemSpec) -> Result<Self> {
        for (slot, &price) in prices.iter().enumerate() {
            if !spec.contains_price(price) {
                return Err(Error::PriceOutOfRange {
                    slot,
                    price,
                    p_min: spec.p_min(),
                    p_max: spec.p_max(),
                });
            }
        }
        Ok(PriceTrace { prices })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.prices
    }
}

/// Per-slot normalized charge quantities.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChargingSchedule {
    v: Vec<f64>,
}

impl ChargingSchedule {
    pub fn new(v: Vec<f64>) -> Self {
        ChargingSchedule { v }
    }

    pub fn zeros(len: usize) -> Self {
        ChargingSchedule { v: vec![0.0; len] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.v.iter().sum()
    }

    pub fn push(&mut self, q: f64) {
        self.v.push(q);
    }
}

/// Charging cost plus dissatisfaction, split into its two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub charging_cost: f64,
    pub dissatisfaction: f64,
    pub total: f64,
}

/// True iff `sched` respects the capacity (and, when `rate_limited`, the
/// per-slot cap of 1) within [`FEASIBILITY_TOL`].
pub fn check_feasible(spec: &ProblemSpec, sched: &ChargingSchedule, rate_limited: bool) -> bool {
    infeasibility(spec, sched, rate_limited).is_none()
}

fn infeasibility(spec: &ProblemSpec, sched: &ChargingSchedule, rate_limited: bool) -> Option<String> {
    for (t, &v) in sched.as_slice().iter().enumerate() {
        if !v.is_finite() || v < -FEASIBILITY_TOL {
            return Some(format!("slot {t} charges {v}"));
        }
        if rate_limited && v > 1.0 + FEASIBILITY_TOL {
            return Some(format!("slot {t} charges {v} > 1"));
        }
    }
    let total = sched.total();
    if total > spec.c() + FEASIBILITY_TOL {
        return Some(format!("total charge {total} exceeds capacity {}", spec.capacity()));
    }
    None
}

/// Charging cost `Σ p(t)v(t)` plus dissatisfaction `α(c − Σ v(t))`.
///
/// The schedule is checked against the capacity only; pass it through
/// [`check_feasible`] first when the per-slot cap matters.
pub fn evaluate_objective(
    spec: &ProblemSpec,
    trace: &PriceTrace,
    sched: &ChargingSchedule,
) -> Result<ObjectiveValue> {
    if trace.len() != sched.len() {
        return Err(Error::LengthMismatch {
            trace: trace.len(),
            schedule: sched.len(),
        });
    }
    if let Some(why) = infeasibility(spec, sched, false) {
        return Err(Error::InfeasibleSchedule(why));
    }
    let charging_cost: f64 = trace
        .prices()
        .iter()
        .zip(sched.as_slice())
        .map(|(p, v)| p * v)
        .sum();
    let mut unmet = spec.c() - sched.total();
    if unmet.abs() <= FEASIBILITY_TOL {
        unmet = 0.0;
    }
    let dissatisfaction = spec.alpha() * unmet;
    Ok(ObjectiveValue {
        charging_cost,
        dissatisfaction,
        total: charging_cost + dissatisfaction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p_min: f64, p_max: f64, alpha: f64, c: u64) -> ProblemSpec {
        ProblemSpec::new(p_min, p_max, alpha, Capacity::integer(c).unwrap()).unwrap()
    }

    #[test]
    fn validate_accepts_basic_instance() {
        let s = spec(1.0, 5.0, 5.0, 1);
        assert_eq!(s.theta(), 5.0);
        assert_eq!(s.slot_minutes(), 5);
    }

    #[test]
    fn validate_rejects_alpha_below_p_min() {
        let err = ProblemSpec::new(1.0, 5.0, 0.5, Capacity::integer(1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::AlphaBelowPMin { .. }));
    }

    #[test]
    fn validate_market_calibration() {
        let s = spec(1.3, 5.902, 2.0 * 1.3, 24);
        assert!((s.theta() - 4.54).abs() < 1e-3);
    }

    #[test]
    fn validate_error_paths() {
        let one = Capacity::integer(1).unwrap();
        assert!(matches!(
            ProblemSpec::new(0.0, 5.0, 5.0, one),
            Err(Error::NonPositivePrice(_))
        ));
        assert!(matches!(
            ProblemSpec::new(-1.0, 5.0, 5.0, one),
            Err(Error::NonPositivePrice(_))
        ));
        assert!(matches!(
            ProblemSpec::new(6.0, 5.0, 7.0, one),
            Err(Error::BoundsInverted { .. })
        ));
        assert!(matches!(Capacity::new(0, 3), Err(Error::ZeroCapacity { .. })));
        assert!(matches!(Capacity::new(3, 0), Err(Error::ZeroCapacity { .. })));
    }

    #[test]
    fn capacity_reduces_to_lowest_terms() {
        let c = Capacity::new(6, 4).unwrap();
        assert_eq!((c.numer(), c.denom()), (3, 2));
        assert_eq!(c.ceil(), 2);
        assert!(c.admits(1));
        assert!(!c.admits(2));
        assert_eq!(c.slot_share(0), 1.0);
        assert_eq!(c.slot_share(1), 0.5);
        assert_eq!(c.slot_share(2), 0.0);
    }

    #[test]
    fn capacity_parsing() {
        assert_eq!("24".parse::<Capacity>().unwrap(), Capacity::integer(24).unwrap());
        assert_eq!("3/2".parse::<Capacity>().unwrap(), Capacity::new(3, 2).unwrap());
        assert_eq!("1.5".parse::<Capacity>().unwrap(), Capacity::new(3, 2).unwrap());
        assert_eq!("19.2".parse::<Capacity>().unwrap(), Capacity::new(96, 5).unwrap());
        assert!("abc".parse::<Capacity>().is_err());
        assert!("0".parse::<Capacity>().is_err());
    }

    #[test]
    fn capacity_approximation_respects_denominator_bound() {
        let c = Capacity::approximate(std::f64::consts::PI, 10_000).unwrap();
        assert_eq!((c.numer(), c.denom()), (355, 113));
        let c = Capacity::approximate(std::f64::consts::PI, 7).unwrap();
        assert_eq!((c.numer(), c.denom()), (22, 7));
    }

    #[test]
    fn capacity_rescale() {
        let c = Capacity::integer(24).unwrap();
        let half = Capacity::new(1, 2).unwrap();
        assert_eq!(c.rescale(half).unwrap(), Capacity::integer(48).unwrap());
        let f = Capacity::new(5, 4).unwrap();
        assert_eq!(c.rescale(f).unwrap(), Capacity::new(96, 5).unwrap());
    }

    #[test]
    fn objective_pure_dissatisfaction() {
        let s = spec(1.0, 10.0, 5.0, 2);
        let trace = PriceTrace::new(vec![3.0, 7.0, 2.0], &s).unwrap();
        let v = evaluate_objective(&s, &trace, &ChargingSchedule::zeros(3)).unwrap();
        assert_eq!(v.total, 10.0);
        assert_eq!(v.charging_cost, 0.0);
    }

    #[test]
    fn objective_single_full_charge() {
        let s = spec(1.0, 10.0, 5.0, 1);
        let trace = PriceTrace::new(vec![3.0], &s).unwrap();
        let v = evaluate_objective(&s, &trace, &ChargingSchedule::new(vec![1.0])).unwrap();
        assert_eq!((v.charging_cost, v.dissatisfaction, v.total), (3.0, 0.0, 3.0));
    }

    #[test]
    fn objective_two_slot_schedule() {
        let s = spec(1.0, 10.0, 2.5, 2);
        let trace = PriceTrace::new(vec![5.0, 3.0, 7.0, 2.0], &s).unwrap();
        let v = evaluate_objective(&s, &trace, &ChargingSchedule::new(vec![0.0, 1.0, 0.0, 1.0]))
            .unwrap();
        assert_eq!(v.total, 5.0);
    }

    #[test]
    fn objective_errors() {
        let s = spec(1.0, 10.0, 2.5, 1);
        let trace = PriceTrace::new(vec![5.0, 3.0], &s).unwrap();
        assert!(matches!(
            evaluate_objective(&s, &trace, &ChargingSchedule::zeros(3)),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            evaluate_objective(&s, &trace, &ChargingSchedule::new(vec![1.0, 1.0])),
            Err(Error::InfeasibleSchedule(_))
        ));
    }

    #[test]
    fn feasibility_checks() {
        let s1 = spec(1.0, 10.0, 2.5, 1);
        assert!(check_feasible(&s1, &ChargingSchedule::new(vec![0.5, 0.5]), true));
        assert!(!check_feasible(&s1, &ChargingSchedule::new(vec![1.2]), true));
        assert!(!check_feasible(&s1, &ChargingSchedule::new(vec![-0.1]), false));
        let s24 = spec(1.0, 10.0, 2.5, 24);
        let mut v = vec![1.0; 24];
        v[0] += 1e-12;
        assert!(check_feasible(&s24, &ChargingSchedule::new(v), true));
    }

    #[test]
    fn trace_rejects_out_of_range_prices() {
        let s = spec(1.0, 5.0, 5.0, 1);
        assert!(matches!(
            PriceTrace::new(vec![1.0, 5.5], &s),
            Err(Error::PriceOutOfRange { slot: 1, .. })
        ));
    }
}
