//! Worst-case price sequences and the adaptive duel against online policies.
//!
//! The no-limit trace starts at `min(alpha/pi, p_max)` and decreases to
//! `p_min` with levels spaced geometrically in `alpha − p`, which makes every
//! per-slot charge of ALG(pi) equal and drives its total charge to `V(pi)`
//! as the number of levels grows. The rate-limited trace repeats each level
//! once per unit of capacity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offline::OfflineState;
use crate::online::{DistributorState, FixedRatioState, OnlinePolicy, SubPolicy};
use crate::problem::{PriceTrace, ProblemSpec};
use crate::ratio::solve_pi_star;

/// Smallest gap allowed between consecutive levels.
pub const MIN_LEVEL_GAP: f64 = 1e-12;

/// Slack on the cumulative-charge comparison of the duel.
pub const DUEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryTrace {
    pub prices: PriceTrace,
    /// Ratio the trace was built to pin.
    pub achieved_ratio_target: f64,
    /// Number of distinct price levels.
    pub steps: usize,
}

/// Decreasing trace from `min(alpha/pi, p_max)` to `p_min` with `steps`
/// levels. `steps` is reduced when needed so that consecutive levels stay at
/// least [`MIN_LEVEL_GAP`] apart.
pub fn worst_case_no_limit(spec: &ProblemSpec, pi: f64, steps: usize) -> Result<AdversaryTrace> {
    if spec.alpha() == spec.p_min() {
        return Err(Error::DegenerateSpec(
            "alpha = p_min: the optimum never charges and no adversary exists".into(),
        ));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "at least 2 levels are needed, got {steps}"
        )));
    }
    if !(pi >= 1.0) || !pi.is_finite() {
        return Err(Error::InvalidParameter(format!("ratio must be >= 1, got {pi}")));
    }
    let prices = levels(spec, pi, steps);
    let steps = prices.len();
    Ok(AdversaryTrace {
        prices: PriceTrace::new(prices, spec)?,
        achieved_ratio_target: pi,
        steps,
    })
}

fn levels(spec: &ProblemSpec, pi: f64, steps: usize) -> Vec<f64> {
    let (alpha, p_min) = (spec.alpha(), spec.p_min());
    let start = (alpha / pi).min(spec.p_max());
    if start <= p_min {
        return vec![p_min];
    }
    let gap0 = alpha - start;
    let span = ((alpha - p_min) / gap0).ln();
    // first gap is gap0·(r − 1) with r − 1 >= ln r = span/(n − 1)
    let cap = (span * gap0 / MIN_LEVEL_GAP).floor() + 1.0;
    let mut n = (steps as f64).min(cap).max(2.0) as usize;
    loop {
        let r = (span / (n - 1) as f64).exp();
        let mut prices: Vec<f64> = (0..n)
            .map(|k| alpha - gap0 * r.powi(k as i32))
            .collect();
        prices[0] = start;
        prices[n - 1] = p_min;
        if n == 2 || prices.windows(2).all(|w| w[0] - w[1] >= MIN_LEVEL_GAP) {
            return prices;
        }
        n = (n * 9 / 10).max(2);
    }
}

/// Repeats each level `times` times.
pub fn repeat_levels(base: &[f64], times: usize) -> Vec<f64> {
    base.iter()
        .flat_map(|&p| std::iter::repeat_n(p, times))
        .collect()
}

/// The no-limit trace at `pi*` with every level repeated `ceil(c)` times.
pub fn worst_case_rate_limited(spec: &ProblemSpec, steps: usize) -> Result<AdversaryTrace> {
    let pi = solve_pi_star(spec).pi_star;
    let base = worst_case_no_limit(spec, pi, steps)?;
    let prices = repeat_levels(base.prices.prices(), spec.capacity().ceil() as usize);
    Ok(AdversaryTrace {
        prices: PriceTrace::new(prices, spec)?,
        achieved_ratio_target: pi,
        steps: base.steps,
    })
}

/// Duels `policy` against the worst-case construction.
///
/// The worst-case trace is replayed next to a reference ALG(pi*) (the
/// divide-and-conquer version for rate-limited policies). The episode ends
/// as soon as the tested policy has charged less than the reference; at that
/// point its cost-plus-dissatisfaction is at least `pi*` times the optimum.
/// Rate-limited policies are checked only at the end of each repeated level
/// and scored against the rate-limited optimum.
///
/// Returns the trace actually played and the tested policy's final ratio.
pub fn adaptive_adversary(
    policy: &mut dyn OnlinePolicy,
    spec: &ProblemSpec,
    steps: usize,
) -> Result<(AdversaryTrace, f64)> {
    let pi = solve_pi_star(spec).pi_star;
    let rate_limited = policy.rate_limited();
    let full = if rate_limited {
        worst_case_rate_limited(spec, steps)?
    } else {
        worst_case_no_limit(spec, pi, steps)?
    };
    let period = if rate_limited {
        spec.capacity().ceil() as usize
    } else {
        1
    };
    let mut reference: Box<dyn OnlinePolicy> = if rate_limited {
        Box::new(DistributorState::new_rat(spec, pi, SubPolicy::Fixed))
    } else {
        Box::new(FixedRatioState::new(spec, pi))
    };
    let mut offline = OfflineState::new(spec);
    let prices = full.prices.prices();
    let mut played = prices.len();
    for (t, &p) in prices.iter().enumerate() {
        policy.step(p, &prices[t + 1..])?;
        reference.step(p, &[])?;
        offline.step(p);
        if (t + 1) % period == 0 && policy.charged() < reference.charged() - DUEL_TOL {
            played = t + 1;
            break;
        }
    }
    let opt = if rate_limited {
        offline.opt_value()
    } else {
        offline.opt_no_limit()
    };
    let ratio = policy.eta() / opt;
    let trace = AdversaryTrace {
        prices: PriceTrace::new(prices[..played].to_vec(), spec)?,
        achieved_ratio_target: pi,
        steps: full.steps,
    };
    Ok((trace, ratio))
}
