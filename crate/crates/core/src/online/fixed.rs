use crate::error::Result;
use crate::problem::ProblemSpec;

use super::{clamp_to_remaining, OnlinePolicy, PolicyStep};

/// Fixed-ratio policy: at each slot charge just enough to bring
/// `η^t / OPT(t)` down to `pi`, i.e. `v(t) = [η^{t−1} − OPT(t)·pi]⁺ / (α − p(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRatioState {
    pi: f64,
    alpha: f64,
    capacity: f64,
    eta: f64,
    opt: f64,
    running_min: f64,
    charged: f64,
}

impl FixedRatioState {
    pub fn new(spec: &ProblemSpec, pi: f64) -> Self {
        Self::with_capacity(spec, spec.c(), pi)
    }

    /// Policy for a sub-problem of the given capacity.
    pub fn with_capacity(spec: &ProblemSpec, capacity: f64, pi: f64) -> Self {
        FixedRatioState {
            pi,
            alpha: spec.alpha(),
            capacity,
            eta: spec.alpha() * capacity,
            opt: spec.alpha() * capacity,
            running_min: f64::INFINITY,
            charged: 0.0,
        }
    }

    /// Only a strict new minimum below `α` moves `OPT`; any other price leaves
    /// `η ≤ pi·OPT` in place and charges exactly zero.
    pub fn step(&mut self, price: f64) -> Result<PolicyStep> {
        let new_min = price < self.running_min;
        self.running_min = self.running_min.min(price);
        self.opt = self.running_min.min(self.alpha) * self.capacity;
        let mut charge = 0.0;
        if new_min && price < self.alpha {
            let raw = (self.eta - self.opt * self.pi).max(0.0) / (self.alpha - price);
            charge = clamp_to_remaining(raw, self.capacity, self.charged)?;
            self.eta -= (self.alpha - price) * charge;
            self.charged += charge;
        }
        Ok(PolicyStep {
            charge,
            eta_after: self.eta,
            opt_after: Some(self.opt),
            target_ratio: Some(self.pi),
        })
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }

    pub fn opt(&self) -> f64 {
        self.opt
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }
}

impl OnlinePolicy for FixedRatioState {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn rate_limited(&self) -> bool {
        false
    }

    fn step(&mut self, price: f64, _lookahead: &[f64]) -> Result<PolicyStep> {
        FixedRatioState::step(self, price)
    }

    fn charged(&self) -> f64 {
        self.charged
    }

    fn eta(&self) -> f64 {
        self.eta
    }
}
