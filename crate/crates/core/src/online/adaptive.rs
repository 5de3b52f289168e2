use crate::error::Result;
use crate::problem::ProblemSpec;
use crate::ratio::{solve_pi_t, AdaptiveRatioContext};

use super::{clamp_to_remaining, OnlinePolicy, PolicyStep};

/// Adaptive-ratio policy. Same charging rule as the fixed-ratio policy, but
/// the target is re-solved at every new running minimum as the smallest
/// ratio that the remaining capacity can still defend. The target never
/// increases and equals `pi*` only on the worst-case opening price.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState {
    spec: ProblemSpec,
    ctx: AdaptiveRatioContext,
    running_min: f64,
    opt: f64,
}

impl AdaptiveState {
    pub fn new(spec: &ProblemSpec, pi_star: f64) -> Self {
        Self::with_capacity(spec, spec.c(), pi_star)
    }

    pub fn with_capacity(spec: &ProblemSpec, capacity: f64, pi_star: f64) -> Self {
        AdaptiveState {
            spec: *spec,
            ctx: AdaptiveRatioContext::initial(spec, capacity, pi_star),
            running_min: f64::INFINITY,
            opt: spec.alpha() * capacity,
        }
    }

    pub fn step(&mut self, price: f64) -> Result<PolicyStep> {
        let alpha = self.spec.alpha();
        let capacity = self.ctx.capacity;
        let new_min = price < self.running_min;
        self.running_min = self.running_min.min(price);
        self.opt = self.running_min.min(alpha) * capacity;

        let mut charge = 0.0;
        if price < alpha && new_min {
            let pi_t = solve_pi_t(&self.ctx, &self.spec, price)?;
            let raw = (self.ctx.eta_prev - self.opt * pi_t).max(0.0) / (alpha - price);
            charge = clamp_to_remaining(raw, capacity, self.ctx.cumulative_charge)?;
            self.ctx.eta_prev -= (alpha - price) * charge;
            self.ctx.cumulative_charge += charge;
            self.ctx.pi_prev = pi_t;
        }
        Ok(PolicyStep {
            charge,
            eta_after: self.ctx.eta_prev,
            opt_after: Some(self.opt),
            target_ratio: Some(self.ctx.pi_prev),
        })
    }

    /// Target currently in force.
    pub fn target(&self) -> f64 {
        self.ctx.pi_prev
    }

    pub fn context(&self) -> &AdaptiveRatioContext {
        &self.ctx
    }

    pub fn opt(&self) -> f64 {
        self.opt
    }
}

impl OnlinePolicy for AdaptiveState {
    fn name(&self) -> String {
        "adaptive".into()
    }

    fn rate_limited(&self) -> bool {
        false
    }

    fn step(&mut self, price: f64, _lookahead: &[f64]) -> Result<PolicyStep> {
        AdaptiveState::step(self, price)
    }

    fn charged(&self) -> f64 {
        self.ctx.cumulative_charge
    }

    fn eta(&self) -> f64 {
        self.ctx.eta_prev
    }
}
