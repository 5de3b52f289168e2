use crate::error::Result;
use crate::problem::ProblemSpec;

use super::{OnlinePolicy, PolicyStep};

/// Receding-horizon decision for the first slot of `window`: plan to charge
/// `remaining` at the cheapest window slots, at most 1 per slot (earlier
/// slots win ties), and return the amount planned for the current slot.
///
/// The window problem has no dissatisfaction term, so a horizon of zero
/// charges at full rate whatever the price.
pub fn rhc_step(remaining: f64, window: &[f64]) -> f64 {
    let remaining = remaining.max(0.0);
    if window.is_empty() || remaining == 0.0 {
        return 0.0;
    }
    let current = window[0];
    // slots that beat the current one, by price then position
    let ahead = window[1..].iter().filter(|&&p| p < current).count();
    (remaining - ahead as f64).clamp(0.0, 1.0)
}

/// Charges `min(1, remaining)` when the price is strictly below the
/// mid-range `(p_max + p_min) / 2`.
pub fn naive_threshold_step(remaining: f64, price: f64, spec: &ProblemSpec) -> f64 {
    let threshold = 0.5 * (spec.p_max() + spec.p_min());
    if price < threshold {
        remaining.clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// RHC-n with lookahead supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct RecedingHorizon {
    horizon: usize,
    alpha: f64,
    capacity: f64,
    charged: f64,
    eta: f64,
    window: Vec<f64>,
}

impl RecedingHorizon {
    pub fn new(spec: &ProblemSpec, horizon: usize) -> Self {
        RecedingHorizon {
            horizon,
            alpha: spec.alpha(),
            capacity: spec.c(),
            charged: 0.0,
            eta: spec.alpha() * spec.c(),
            window: Vec::with_capacity(horizon + 1),
        }
    }
}

impl OnlinePolicy for RecedingHorizon {
    fn name(&self) -> String {
        format!("rhc:{}", self.horizon)
    }

    fn rate_limited(&self) -> bool {
        true
    }

    fn step(&mut self, price: f64, lookahead: &[f64]) -> Result<PolicyStep> {
        self.window.clear();
        self.window.push(price);
        self.window
            .extend_from_slice(&lookahead[..self.horizon.min(lookahead.len())]);
        let charge = rhc_step(self.capacity - self.charged, &self.window);
        self.charged += charge;
        self.eta -= (self.alpha - price) * charge;
        Ok(PolicyStep {
            charge,
            eta_after: self.eta,
            opt_after: None,
            target_ratio: None,
        })
    }

    fn charged(&self) -> f64 {
        self.charged
    }

    fn eta(&self) -> f64 {
        self.eta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveThreshold {
    spec: ProblemSpec,
    charged: f64,
    eta: f64,
}

impl NaiveThreshold {
    pub fn new(spec: &ProblemSpec) -> Self {
        NaiveThreshold {
            spec: *spec,
            charged: 0.0,
            eta: spec.alpha() * spec.c(),
        }
    }

    pub fn threshold(&self) -> f64 {
        0.5 * (self.spec.p_max() + self.spec.p_min())
    }
}

impl OnlinePolicy for NaiveThreshold {
    fn name(&self) -> String {
        "naive".into()
    }

    fn rate_limited(&self) -> bool {
        true
    }

    fn step(&mut self, price: f64, _lookahead: &[f64]) -> Result<PolicyStep> {
        let charge = naive_threshold_step(self.spec.c() - self.charged, price, &self.spec);
        self.charged += charge;
        self.eta -= (self.spec.alpha() - price) * charge;
        Ok(PolicyStep {
            charge,
            eta_after: self.eta,
            opt_after: None,
            target_ratio: None,
        })
    }

    fn charged(&self) -> f64 {
        self.charged
    }

    fn eta(&self) -> f64 {
        self.eta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Capacity;

    /// Window plan by enumerating how much goes to each slot on a 1/4 grid.
    fn brute_window_first(remaining: f64, window: &[f64]) -> f64 {
        // charge the most possible, then cheapest; enumerate on quarters
        let steps: Vec<f64> = (0..=4).map(|k| k as f64 / 4.0).collect();
        let mut best: Option<(f64, f64, f64)> = None; // (charged, cost, first)
        let n = window.len();
        let mut idx = vec![0usize; n];
        loop {
            let v: Vec<f64> = idx.iter().map(|&k| steps[k]).collect();
            let total: f64 = v.iter().sum();
            if total <= remaining + 1e-12 {
                let cost: f64 = v.iter().zip(window).map(|(a, p)| a * p).sum();
                let better = match best {
                    None => true,
                    Some((bc, bcost, _)) => {
                        total > bc + 1e-12 || ((total - bc).abs() <= 1e-12 && cost < bcost - 1e-12)
                    }
                };
                if better {
                    best = Some((total, cost, v[0]));
                }
            }
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < steps.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        best.map(|b| b.2).unwrap_or(0.0)
    }

    #[test]
    fn horizon_zero_charges_at_full_rate() {
        assert_eq!(rhc_step(2.0, &[9.0]), 1.0);
        assert_eq!(rhc_step(0.25, &[9.0]), 0.25);
    }

    #[test]
    fn waits_for_cheaper_slot_in_window() {
        assert_eq!(rhc_step(1.0, &[5.0, 3.0, 4.0]), 0.0);
        assert_eq!(brute_window_first(1.0, &[5.0, 3.0, 4.0]), 0.0);
        assert_eq!(rhc_step(2.5, &[5.0, 3.0, 4.0]), 0.5);
        assert_eq!(brute_window_first(2.5, &[5.0, 3.0, 4.0]), 0.5);
    }

    #[test]
    fn nothing_left_means_no_charge() {
        assert_eq!(rhc_step(0.0, &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn matches_window_enumeration() {
        let windows: [&[f64]; 4] = [&[2.0, 2.0, 1.0], &[1.0, 3.0, 3.0, 2.0], &[4.0, 1.0, 1.0], &[3.0]];
        for w in windows {
            for rem in [0.25, 0.5, 1.0, 1.75, 2.0, 3.0] {
                assert_eq!(rhc_step(rem, w), brute_window_first(rem, w), "{w:?} {rem}");
            }
        }
    }

    #[test]
    fn naive_threshold_rules() {
        let s = ProblemSpec::new(1.3, 5.902, 5.902, Capacity::integer(24).unwrap()).unwrap();
        assert!((NaiveThreshold::new(&s).threshold() - 3.601).abs() < 1e-12);
        assert_eq!(naive_threshold_step(24.0, 3.0, &s), 1.0);
        assert_eq!(naive_threshold_step(24.0, 3.601, &s), 0.0);
        assert_eq!(naive_threshold_step(0.4, 2.0, &s), 0.4);
    }
}
