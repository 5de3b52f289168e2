//! Online charging policies behind a common step interface.
//!
//! The competitive policies keep the running ratio between their own
//! cost-plus-dissatisfaction `η^t` and the hindsight optimum `OPT(t)` at or
//! below a target. [`FixedRatioState`] uses the constant optimal target,
//! [`AdaptiveState`] lowers the target as the price history allows, and
//! [`DistributorState`] extends either to the rate-limited problem by routing
//! prices to unit (or `1/n`) sub-problems. The baselines are a receding
//! horizon controller with oracle lookahead and a mid-range threshold rule.

mod adaptive;
mod baseline;
mod distributor;
mod fixed;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adaptive::AdaptiveState;
pub use baseline::{naive_threshold_step, rhc_step, NaiveThreshold, RecedingHorizon};
pub use distributor::{DistributorState, SubPolicy};
pub use fixed::FixedRatioState;

use crate::error::{Error, Result};
use crate::problem::{ProblemSpec, FEASIBILITY_TOL};
use crate::ratio::RatioSolution;

/// Outcome of one online decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyStep {
    pub charge: f64,
    /// `η^t` after this slot.
    pub eta_after: f64,
    /// Hindsight optimum as tracked by the policy itself; baselines do not
    /// track one.
    pub opt_after: Option<f64>,
    /// Ratio target in force at this slot.
    pub target_ratio: Option<f64>,
}

/// A deterministic online charging policy.
pub trait OnlinePolicy: Send {
    fn name(&self) -> String;

    /// Whether the policy respects the per-slot cap of 1.
    fn rate_limited(&self) -> bool;

    /// Decides the charge for the slot priced `price`. `lookahead` holds the
    /// prices of the following slots when the caller chooses to reveal them;
    /// only the receding-horizon baseline reads it.
    fn step(&mut self, price: f64, lookahead: &[f64]) -> Result<PolicyStep>;

    /// Total charged so far.
    fn charged(&self) -> f64;

    /// Current `η^t`.
    fn eta(&self) -> f64;
}

/// Policies selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Fixed,
    Adaptive,
    Int,
    IntAdaptive,
    Rat,
    RatAdaptive,
    Rhc(usize),
    Naive,
}

impl PolicyKind {
    /// The policies carrying the `pi*` guarantee.
    pub fn is_competitive(&self) -> bool {
        !matches!(self, PolicyKind::Rhc(_) | PolicyKind::Naive)
    }

    /// Rate-limited policies are scored against the rate-limited optimum,
    /// the others against the optimum without a per-slot cap.
    pub fn rate_limited(&self) -> bool {
        !matches!(self, PolicyKind::Fixed | PolicyKind::Adaptive)
    }

    pub fn build(&self, spec: &ProblemSpec, ratio: &RatioSolution) -> Result<Box<dyn OnlinePolicy>> {
        let pi = ratio.pi_star;
        Ok(match *self {
            PolicyKind::Fixed => Box::new(FixedRatioState::new(spec, pi)),
            PolicyKind::Adaptive => Box::new(AdaptiveState::new(spec, pi)),
            PolicyKind::Int => Box::new(DistributorState::new_int(spec, pi, SubPolicy::Fixed)?),
            PolicyKind::IntAdaptive => {
                Box::new(DistributorState::new_int(spec, pi, SubPolicy::Adaptive)?)
            }
            PolicyKind::Rat => Box::new(DistributorState::new_rat(spec, pi, SubPolicy::Fixed)),
            PolicyKind::RatAdaptive => {
                Box::new(DistributorState::new_rat(spec, pi, SubPolicy::Adaptive))
            }
            PolicyKind::Rhc(n) => Box::new(RecedingHorizon::new(spec, n)),
            PolicyKind::Naive => Box::new(NaiveThreshold::new(spec)),
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Fixed => f.write_str("fixed"),
            PolicyKind::Adaptive => f.write_str("adaptive"),
            PolicyKind::Int => f.write_str("int"),
            PolicyKind::IntAdaptive => f.write_str("int-adaptive"),
            PolicyKind::Rat => f.write_str("rat"),
            PolicyKind::RatAdaptive => f.write_str("rat-adaptive"),
            PolicyKind::Rhc(n) => write!(f, "rhc:{n}"),
            PolicyKind::Naive => f.write_str("naive"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "fixed" => PolicyKind::Fixed,
            "adaptive" => PolicyKind::Adaptive,
            "int" => PolicyKind::Int,
            "int-adaptive" => PolicyKind::IntAdaptive,
            "rat" => PolicyKind::Rat,
            "rat-adaptive" => PolicyKind::RatAdaptive,
            "naive" => PolicyKind::Naive,
            _ => match s.strip_prefix("rhc:").map(str::parse::<usize>) {
                Some(Ok(n)) => PolicyKind::Rhc(n),
                _ => return Err(Error::UnknownPolicy(s.to_string())),
            },
        })
    }
}

/// Parses a comma-separated policy list.
pub fn parse_policies(list: &str) -> Result<Vec<PolicyKind>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Caps `raw` at the remaining capacity. Overshoot beyond the feasibility
/// tolerance means the ratio target was not feasible.
pub(crate) fn clamp_to_remaining(raw: f64, capacity: f64, charged: f64) -> Result<f64> {
    let remaining = (capacity - charged).max(0.0);
    if raw > remaining + FEASIBILITY_TOL {
        return Err(Error::InternalConsistency(format!(
            "charge {raw} exceeds remaining capacity {remaining} of {capacity}"
        )));
    }
    Ok(raw.min(remaining))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_round_trip() {
        for name in ["fixed", "adaptive", "int", "int-adaptive", "rat", "rat-adaptive", "rhc:0", "rhc:12", "naive"] {
            let kind: PolicyKind = name.parse().unwrap();
            assert_eq!(kind.to_string(), name);
        }
        assert!(matches!("rhc:x".parse::<PolicyKind>(), Err(Error::UnknownPolicy(_))));
        assert!(matches!("greedy".parse::<PolicyKind>(), Err(Error::UnknownPolicy(_))));
        assert_eq!(
            parse_policies("fixed, rhc:2,naive").unwrap(),
            vec![PolicyKind::Fixed, PolicyKind::Rhc(2), PolicyKind::Naive]
        );
    }

    #[test]
    fn clamp_rejects_real_overshoot() {
        assert_eq!(clamp_to_remaining(0.3, 1.0, 0.6).unwrap(), 0.3);
        assert_eq!(clamp_to_remaining(0.4 + 1e-12, 1.0, 0.6).unwrap(), 0.4);
        assert!(matches!(
            clamp_to_remaining(0.5 + 1e-6, 1.0, 0.5),
            Err(Error::InternalConsistency(_))
        ));
    }
}
