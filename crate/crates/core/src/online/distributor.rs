use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;

use super::{AdaptiveState, FixedRatioState, OnlinePolicy, PolicyStep};

/// Policy run inside each sub-problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubPolicy {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
enum SubState {
    Fixed(FixedRatioState),
    Adaptive(AdaptiveState),
}

impl SubState {
    fn new(kind: SubPolicy, spec: &ProblemSpec, capacity: f64, pi: f64) -> Self {
        match kind {
            SubPolicy::Fixed => SubState::Fixed(FixedRatioState::with_capacity(spec, capacity, pi)),
            SubPolicy::Adaptive => {
                SubState::Adaptive(AdaptiveState::with_capacity(spec, capacity, pi))
            }
        }
    }

    fn step(&mut self, price: f64) -> Result<PolicyStep> {
        match self {
            SubState::Fixed(s) => s.step(price),
            SubState::Adaptive(s) => s.step(price),
        }
    }

    fn eta(&self) -> f64 {
        match self {
            SubState::Fixed(s) => OnlinePolicy::eta(s),
            SubState::Adaptive(s) => OnlinePolicy::eta(s),
        }
    }

    fn opt(&self) -> f64 {
        match self {
            SubState::Fixed(s) => s.opt(),
            SubState::Adaptive(s) => s.opt(),
        }
    }

    fn charged(&self) -> f64 {
        match self {
            SubState::Fixed(s) => OnlinePolicy::charged(s),
            SubState::Adaptive(s) => OnlinePolicy::charged(s),
        }
    }
}

/// Divide-and-conquer policy for the rate-limited problem.
///
/// Capacity `m/n` is split into `m` sub-problems of capacity `1/n`, each
/// running a ratio policy. `mu[i]` is the last price routed to sub-problem
/// `i` (initially `alpha`). A new price below `max mu` is routed to every
/// sub-problem that is both above it and among the `n` largest `mu`; ties go
/// to the lowest index. Integer capacities are the case `n = 1`. When
/// `m <= n` the per-slot cap cannot bind and the whole capacity is handed to
/// a single unconstrained policy.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributorState {
    name: &'static str,
    alpha: f64,
    mu: Vec<f64>,
    subs: Vec<SubState>,
    /// Sub-problems fed per price.
    fan_out: usize,
    direct: bool,
    eta: f64,
    charged: f64,
    order: Vec<usize>,
}

impl DistributorState {
    /// Integer capacities only.
    pub fn new_int(spec: &ProblemSpec, pi: f64, sub: SubPolicy) -> Result<Self> {
        if !spec.capacity().is_integer() {
            return Err(Error::InvalidParameter(format!(
                "integer capacity required, got {}; use the rational distributor",
                spec.capacity()
            )));
        }
        let mut st = Self::build(spec, pi, sub);
        st.name = match sub {
            SubPolicy::Fixed => "int",
            SubPolicy::Adaptive => "int-adaptive",
        };
        Ok(st)
    }

    pub fn new_rat(spec: &ProblemSpec, pi: f64, sub: SubPolicy) -> Self {
        let mut st = Self::build(spec, pi, sub);
        st.name = match sub {
            SubPolicy::Fixed => "rat",
            SubPolicy::Adaptive => "rat-adaptive",
        };
        st
    }

    fn build(spec: &ProblemSpec, pi: f64, sub: SubPolicy) -> Self {
        let cap = spec.capacity();
        let (m, n) = (cap.numer() as usize, cap.denom() as usize);
        let direct = m <= n;
        let (count, sub_capacity) = if direct {
            (1, spec.c())
        } else {
            (m, 1.0 / n as f64)
        };
        DistributorState {
            name: "rat",
            alpha: spec.alpha(),
            mu: vec![spec.alpha(); count],
            subs: (0..count)
                .map(|_| SubState::new(sub, spec, sub_capacity, pi))
                .collect(),
            fan_out: n,
            direct,
            eta: spec.alpha() * spec.c(),
            charged: 0.0,
            order: (0..count).collect(),
        }
    }

    pub fn step(&mut self, price: f64) -> Result<PolicyStep> {
        let charge = if self.direct {
            self.mu[0] = self.mu[0].min(price);
            self.subs[0].step(price)?.charge
        } else {
            self.route(price)?
        };
        self.eta -= (self.alpha - price) * charge;
        self.charged += charge;
        Ok(PolicyStep {
            charge,
            eta_after: self.eta,
            opt_after: Some(self.sub_opt_sum()),
            target_ratio: None,
        })
    }

    fn route(&mut self, price: f64) -> Result<f64> {
        let top = self.mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if price >= top {
            return Ok(0.0);
        }
        let mu = &self.mu;
        if self.fan_out == 1 {
            // first index holding the maximum
            let i = mu.iter().position(|&x| x == top).unwrap_or(0);
            self.mu[i] = price;
            return Ok(self.subs[i].step(price)?.charge);
        }
        self.order.sort_by(|&a, &b| {
            mu[b]
                .partial_cmp(&mu[a])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut chosen: Vec<usize> = self.order[..self.fan_out]
            .iter()
            .copied()
            .filter(|&i| self.mu[i] > price)
            .collect();
        chosen.sort_unstable();
        let mut charge = 0.0;
        for i in chosen {
            self.mu[i] = price;
            charge += self.subs[i].step(price)?.charge;
        }
        Ok(charge)
    }

    /// Latest price routed to each sub-problem.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sub_etas(&self) -> Vec<f64> {
        self.subs.iter().map(SubState::eta).collect()
    }

    pub fn sub_opts(&self) -> Vec<f64> {
        self.subs.iter().map(SubState::opt).collect()
    }

    pub fn sub_charged(&self) -> Vec<f64> {
        self.subs.iter().map(SubState::charged).collect()
    }

    /// `Σ_i OPT_i(t)`.
    pub fn sub_opt_sum(&self) -> f64 {
        self.subs.iter().map(SubState::opt).sum()
    }

    pub fn is_direct(&self) -> bool {
        self.direct
    }
}

impl OnlinePolicy for DistributorState {
    fn name(&self) -> String {
        self.name.into()
    }

    fn rate_limited(&self) -> bool {
        true
    }

    fn step(&mut self, price: f64, _lookahead: &[f64]) -> Result<PolicyStep> {
        DistributorState::step(self, price)
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
    use crate::online::FixedRatioState;
    use crate::problem::Capacity;
    use crate::ratio::solve_pi_star;

    fn spec(alpha: f64, cap: Capacity) -> ProblemSpec {
        ProblemSpec::new(1.0, 10.0, alpha, cap).unwrap()
    }

    #[test]
    fn int_routes_to_highest_mu() {
        let s = spec(10.0, Capacity::integer(2).unwrap());
        let pi = solve_pi_star(&s).pi_star;
        let mut d = DistributorState::new_int(&s, pi, SubPolicy::Fixed).unwrap();
        d.step(5.0).unwrap();
        assert_eq!(d.mu(), &[5.0, 10.0]);
        d.step(3.0).unwrap();
        assert_eq!(d.mu(), &[5.0, 3.0]);
        let discarded = d.step(7.0).unwrap();
        assert_eq!(discarded.charge, 0.0);
        assert_eq!(d.mu(), &[5.0, 3.0]);
        d.step(2.0).unwrap();
        assert_eq!(d.mu(), &[2.0, 3.0]);
    }

    #[test]
    fn int_fills_fresh_subproblems_in_order() {
        let s = spec(10.0, Capacity::integer(3).unwrap());
        let mut d = DistributorState::new_int(&s, 2.0, SubPolicy::Fixed).unwrap();
        for p in [6.0, 8.0, 7.0] {
            d.step(p).unwrap();
        }
        assert_eq!(d.mu(), &[6.0, 8.0, 7.0]);
    }

    #[test]
    fn int_discards_price_equal_to_max_mu() {
        let s = spec(10.0, Capacity::integer(1).unwrap());
        let mut d = DistributorState::new_int(&s, 2.0, SubPolicy::Fixed).unwrap();
        d.step(4.0).unwrap();
        let before = d.clone();
        let step = d.step(4.0).unwrap();
        assert_eq!(step.charge, 0.0);
        assert_eq!(d, before);
    }

    #[test]
    fn int_requires_integer_capacity() {
        let s = spec(10.0, Capacity::new(3, 2).unwrap());
        assert!(DistributorState::new_int(&s, 2.0, SubPolicy::Fixed).is_err());
    }

    #[test]
    fn rat_fans_out_to_n_largest() {
        let s = spec(10.0, Capacity::new(3, 2).unwrap());
        let pi = solve_pi_star(&s).pi_star;
        let mut d = DistributorState::new_rat(&s, pi, SubPolicy::Fixed);
        let step = d.step(4.0).unwrap();
        assert_eq!(d.mu(), &[4.0, 4.0, 10.0]);
        let charged = d.sub_charged();
        assert!((step.charge - (charged[0] + charged[1])).abs() < 1e-15);
        assert_eq!(charged[2], 0.0);
        d.step(3.0).unwrap();
        assert_eq!(d.mu(), &[3.0, 4.0, 3.0]);
    }

    #[test]
    fn rat_ignores_price_above_all_mu() {
        let s = spec(5.0, Capacity::new(5, 2).unwrap());
        let mut d = DistributorState::new_rat(&s, 2.0, SubPolicy::Fixed);
        for p in [2.0, 2.0, 2.0] {
            d.step(p).unwrap();
        }
        let before = d.clone();
        let step = d.step(2.0).unwrap();
        assert_eq!(step.charge, 0.0);
        assert_eq!(d.mu(), before.mu());
    }

    #[test]
    fn rat_with_unit_denominator_matches_int() {
        let s = spec(8.0, Capacity::integer(3).unwrap());
        let pi = solve_pi_star(&s).pi_star;
        let mut a = DistributorState::new_int(&s, pi, SubPolicy::Fixed).unwrap();
        let mut b = DistributorState::new_rat(&s, pi, SubPolicy::Fixed);
        for p in [7.0, 3.0, 9.0, 2.5, 2.5, 6.0, 1.5, 4.0, 1.1, 1.0] {
            let x = a.step(p).unwrap();
            let y = b.step(p).unwrap();
            assert_eq!(x.charge, y.charge);
            assert_eq!(x.eta_after, y.eta_after);
        }
    }

    #[test]
    fn small_capacity_runs_unconstrained_policy() {
        let s = spec(6.0, Capacity::new(2, 3).unwrap());
        let pi = solve_pi_star(&s).pi_star;
        let mut d = DistributorState::new_rat(&s, pi, SubPolicy::Fixed);
        let mut f = FixedRatioState::new(&s, pi);
        assert!(d.is_direct());
        for p in [5.0, 4.0, 4.5, 2.0, 1.0] {
            let x = d.step(p).unwrap();
            let y = f.step(p).unwrap();
            assert_eq!(x.charge, y.charge);
        }
    }
}
