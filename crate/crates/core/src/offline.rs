//! Offline optima, evaluated on a price prefix.
//!
//! Without a rate limit the hindsight optimum charges everything at the
//! lowest price seen (or nothing, if that price is not below `alpha`). With
//! the per-slot cap of 1 it fills the capacity at the cheapest slots priced
//! strictly below `alpha`; for a fractional capacity `m/n` the marginal slot
//! takes the fractional remainder, which is the LP optimum.

use std::cmp::Ordering;

use crate::problem::{Capacity, ChargingSchedule, ProblemSpec};

/// `min{p'_min, alpha} · c`, where `p'_min` is the lowest price in `prices`.
pub fn opt_no_limit(spec: &ProblemSpec, prices: &[f64]) -> f64 {
    opt_no_limit_with(spec.alpha(), spec.c(), prices)
}

pub(crate) fn opt_no_limit_with(alpha: f64, capacity: f64, prices: &[f64]) -> f64 {
    let low = prices.iter().copied().fold(f64::INFINITY, f64::min);
    low.min(alpha) * capacity
}

/// A kept slot: its price and 0-based index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeptSlot {
    pub price: f64,
    pub slot: usize,
}

fn kept_order(a: &KeptSlot, b: &KeptSlot) -> Ordering {
    a.price
        .total_cmp(&b.price)
        .then_with(|| a.slot.cmp(&b.slot))
}

/// Value of the greedy fill over `kept`, which must be sorted cheapest first.
fn fill_value(alpha: f64, capacity: Capacity, kept: &[KeptSlot]) -> f64 {
    let mut cost = 0.0;
    for (k, slot) in kept.iter().enumerate() {
        cost += slot.price * capacity.slot_share(k as u64);
    }
    let charged = charged_amount(capacity, kept.len());
    cost + alpha * (capacity.as_f64() - charged)
}

fn charged_amount(capacity: Capacity, kept: usize) -> f64 {
    if capacity.admits(kept as u64) {
        kept as f64
    } else {
        capacity.as_f64()
    }
}

/// Rate-limited optimum on `prices` and the schedule attaining it.
pub fn opt_rate_limited(spec: &ProblemSpec, prices: &[f64]) -> (f64, ChargingSchedule) {
    let alpha = spec.alpha();
    let capacity = spec.capacity();
    let mut qualifying: Vec<KeptSlot> = prices
        .iter()
        .enumerate()
        .filter(|(_, &p)| p < alpha)
        .map(|(slot, &price)| KeptSlot { price, slot })
        .collect();
    qualifying.sort_by(kept_order);
    qualifying.truncate(capacity.ceil() as usize);

    let mut v = vec![0.0; prices.len()];
    for (k, kept) in qualifying.iter().enumerate() {
        v[kept.slot] = capacity.slot_share(k as u64);
    }
    (
        fill_value(alpha, capacity, &qualifying),
        ChargingSchedule::new(v),
    )
}

/// Streaming form of [`opt_rate_limited`].
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineState {
    alpha: f64,
    capacity: Capacity,
    t: usize,
    running_min: f64,
    kept: Vec<KeptSlot>,
    opt_value: f64,
}

impl OfflineState {
    pub fn new(spec: &ProblemSpec) -> Self {
        OfflineState {
            alpha: spec.alpha(),
            capacity: spec.capacity(),
            t: 0,
            running_min: f64::INFINITY,
            kept: Vec::with_capacity(spec.capacity().ceil() as usize + 1),
            opt_value: spec.alpha() * spec.c(),
        }
    }

    /// Absorbs the next price.
    pub fn step(&mut self, price: f64) {
        let slot = self.t;
        self.t += 1;
        self.running_min = self.running_min.min(price);
        if price >= self.alpha {
            return;
        }
        let limit = self.capacity.ceil() as usize;
        let entry = KeptSlot { price, slot };
        if self.kept.len() == limit {
            // ties keep the earlier slot, so an equal price never evicts
            match self.kept.last() {
                Some(last) if kept_order(&entry, last) == Ordering::Less => {
                    self.kept.pop();
                }
                _ => return,
            }
        }
        let at = self
            .kept
            .partition_point(|k| kept_order(k, &entry) == Ordering::Less);
        self.kept.insert(at, entry);
        self.opt_value = fill_value(self.alpha, self.capacity, &self.kept);
    }

    /// Rate-limited `OPT(t)` over everything absorbed so far.
    pub fn opt_value(&self) -> f64 {
        self.opt_value
    }

    /// No-limit `OPT(t)` over the same prefix.
    pub fn opt_no_limit(&self) -> f64 {
        self.running_min.min(self.alpha) * self.capacity.as_f64()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn running_min(&self) -> f64 {
        self.running_min
    }

    /// Kept slots, cheapest first.
    pub fn kept(&self) -> &[KeptSlot] {
        &self.kept
    }
}

/// Pure state-in/state-out form of [`OfflineState::step`].
pub fn offline_step(mut state: OfflineState, price: f64) -> OfflineState {
    state.step(price);
    state
}
