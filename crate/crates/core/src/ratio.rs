//! Competitive-ratio solver.
//!
//! `V(pi)` is the largest total charge an adversary can extract from the
//! fixed-ratio policy with target `pi`. The optimal ratio `pi*` is the unique
//! `pi` with `V(pi) = c`. Depending on whether `alpha` exceeds the threshold
//! price `alpha*`, `pi*` has a closed form or is the root of a scalar
//! equation, which is found by bisection.
//!
//! The adaptive policy re-solves the same feasibility condition every slot
//! given the charging history, which yields the closed form in
//! [`solve_pi_t`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;

/// Residual target for the scalar root equations.
pub const ROOT_TOL: f64 = 1e-10;
/// Relative tolerance on `V(pi*) = c`.
pub const CHARGE_TOL: f64 = 1e-9;

/// Interior lower bracket for the ratio equation, where `V` diverges at 1.
const PI_LOWER: f64 = 1.0 + 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioBranch {
    /// `alpha > alpha*`: closed form, the worst case opens at `p_max`.
    ClosedForm,
    /// `alpha <= alpha*`: root of the ratio equation, the worst case opens
    /// at `alpha / pi*`.
    Root,
    /// `alpha = p_min` or `p_min = p_max`: `pi* = 1`.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSolution {
    /// `None` when the threshold equation has no bracket (`theta` ~ 1).
    pub alpha_star: Option<f64>,
    pub pi_star: f64,
    pub branch: RatioBranch,
    pub upper_bound: f64,
    /// `|V(pi*) − c|`.
    pub residual: f64,
}

/// `min{sqrt(alpha / p_min), theta}`.
pub fn pi_star_upper_bound(spec: &ProblemSpec) -> f64 {
    (spec.alpha() / spec.p_min()).sqrt().min(spec.theta())
}

/// `V(pi)`, the maximum total charge of the fixed-ratio policy.
pub fn max_total_charge(spec: &ProblemSpec, pi: f64) -> Result<f64> {
    max_total_charge_with(spec.p_min(), spec.p_max(), spec.alpha(), spec.c(), pi)
}

pub(crate) fn max_total_charge_with(
    p_min: f64,
    p_max: f64,
    alpha: f64,
    c: f64,
    pi: f64,
) -> Result<f64> {
    if !(pi >= 1.0) || !pi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target ratio must be a finite value >= 1, got {pi}"
        )));
    }
    let opening = alpha / pi;
    if opening <= p_min {
        Ok(0.0)
    } else if opening <= p_max {
        let gap = alpha - opening;
        if gap <= 0.0 {
            return Err(Error::DegenerateAtPiOne);
        }
        Ok(c * pi * ((alpha - p_min) / gap).ln())
    } else {
        let head = (alpha * c - p_max * c * pi) / (alpha - p_max);
        Ok(head + c * pi * ((alpha - p_min) / (alpha - p_max)).ln())
    }
}

/// Bisection on a decreasing function with `f(lo) > 0 >= f(hi)`; returns the
/// final bracket.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    for _ in 0..400 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Left side minus one of the threshold equation
/// `(alpha / p_max) ln((alpha − p_min)/(alpha − p_max)) = 1`; decreasing in
/// `alpha` on `(p_max, ∞)`.
fn threshold_gap(p_min: f64, p_max: f64, alpha: f64) -> f64 {
    (alpha / p_max) * ((p_max - p_min) / (alpha - p_max)).ln_1p() - 1.0
}

/// The threshold price `alpha*` separating the two regimes of `pi*`.
pub fn solve_alpha_star(spec: &ProblemSpec) -> Result<f64> {
    let (p_min, p_max) = (spec.p_min(), spec.p_max());
    if p_max <= p_min {
        return Err(Error::NoBracket("p_min = p_max, the equation has no root".into()));
    }
    let g = |a: f64| threshold_gap(p_min, p_max, a);
    let lo = p_max * (1.0 + 1e-9);
    if !(g(lo) > 0.0) {
        return Err(Error::NoBracket(format!(
            "theta = {} is too close to 1; the root lies below {lo}",
            spec.theta()
        )));
    }
    let mut hi = 2.0 * p_max;
    while g(hi) > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::NoBracket("bracket expansion overflowed".into()));
        }
    }
    let (lo, hi) = bisect_decreasing(g, lo, hi);
    Ok(if g(lo).abs() < g(hi).abs() { lo } else { hi })
}

/// Left side minus one of the ratio equation
/// `pi ln((alpha − p_min)/(alpha − alpha/pi)) = 1`.
fn ratio_gap(p_min: f64, alpha: f64, pi: f64) -> f64 {
    let gap = alpha * (pi - 1.0) / pi;
    pi * ((alpha - p_min) / gap).ln() - 1.0
}

/// Optimal fixed ratio `pi*` for `spec`.
pub fn solve_pi_star(spec: &ProblemSpec) -> RatioSolution {
    let (p_min, p_max, alpha, c) = (spec.p_min(), spec.p_max(), spec.alpha(), spec.c());
    let upper_bound = pi_star_upper_bound(spec);
    let alpha_star = solve_alpha_star(spec).ok();
    let residual_at = |pi: f64| {
        max_total_charge(spec, pi)
            .map(|v| (v - c).abs())
            .unwrap_or(f64::INFINITY)
    };

    if alpha <= p_min || p_max <= p_min {
        return RatioSolution {
            alpha_star,
            pi_star: 1.0,
            branch: RatioBranch::Degenerate,
            upper_bound,
            residual: residual_at(1.0),
        };
    }

    // alpha > alpha*  <=>  V(alpha / p_max) < c  <=>  the threshold gap at alpha is negative
    if alpha > p_max && threshold_gap(p_min, p_max, alpha) < 0.0 {
        let lead = p_max / (alpha - p_max);
        let log = ((p_max - p_min) / (alpha - p_max)).ln_1p();
        let pi_star = lead / (lead - log);
        return RatioSolution {
            alpha_star,
            pi_star,
            branch: RatioBranch::ClosedForm,
            upper_bound,
            residual: residual_at(pi_star),
        };
    }

    let h = |pi: f64| ratio_gap(p_min, alpha, pi);
    let pi_star = if h(PI_LOWER) <= 0.0 {
        PI_LOWER
    } else {
        let mut hi = upper_bound;
        if h(hi) > 0.0 {
            hi = alpha / p_min;
        }
        // the upper end keeps V(pi*) <= c
        bisect_decreasing(h, PI_LOWER, hi).1
    };
    RatioSolution {
        alpha_star,
        pi_star,
        branch: RatioBranch::Root,
        upper_bound,
        residual: residual_at(pi_star),
    }
}

/// State entering the adaptive target computation at slot `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRatioContext {
    /// Capacity of the (sub-)problem the target applies to.
    pub capacity: f64,
    /// `Σ_{τ<t} v(τ)`.
    pub cumulative_charge: f64,
    /// `η^{t−1}`.
    pub eta_prev: f64,
    /// Target in force before slot `t`.
    pub pi_prev: f64,
}

impl AdaptiveRatioContext {
    /// Context before any price has been seen: nothing charged, `η⁰ = αc`,
    /// and the target starts at `pi*`.
    pub fn initial(spec: &ProblemSpec, capacity: f64, pi_star: f64) -> Self {
        AdaptiveRatioContext {
            capacity,
            cumulative_charge: 0.0,
            eta_prev: spec.alpha() * capacity,
            pi_prev: pi_star,
        }
    }
}

/// `V_t(pi_t)`: the most the adversary can still make the policy charge in
/// total when it targets `pi_t` from slot `t` on. `price` must be below
/// `alpha`.
pub fn max_total_charge_from(
    ctx: &AdaptiveRatioContext,
    spec: &ProblemSpec,
    pi_t: f64,
    price: f64,
) -> f64 {
    let (alpha, c) = (spec.alpha(), ctx.capacity);
    let gap = alpha - price;
    ctx.cumulative_charge
        + (ctx.eta_prev - price * c * pi_t) / gap
        + c * pi_t * ((alpha - spec.p_min()) / gap).ln()
}

/// Smallest ratio the adaptive policy can still guarantee at a slot whose
/// price is a new running minimum below `alpha`.
///
/// Solves `V_t(pi_t) = c`. Numerator and denominator of the closed form are
/// both negative; a non-negative denominator means the caller broke the
/// price preconditions. When the solved target would not make the policy
/// charge at this price, the price does not constrain the adversary and the
/// previous target stays in force.
pub fn solve_pi_t(ctx: &AdaptiveRatioContext, spec: &ProblemSpec, price: f64) -> Result<f64> {
    let (alpha, c) = (spec.alpha(), ctx.capacity);
    let gap = alpha - price;
    let log = ((alpha - spec.p_min()) / gap).ln();
    let denom = c * log - c * price / gap;
    if !(denom < 0.0) {
        return Err(Error::DenominatorSignViolation(denom));
    }
    let numer = c - ctx.cumulative_charge - ctx.eta_prev / gap;
    let pi_t = numer / denom;
    if pi_t * price * c > ctx.eta_prev {
        return Ok(ctx.pi_prev);
    }
    Ok(pi_t.min(ctx.pi_prev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Capacity;

    fn spec(p_min: f64, p_max: f64, alpha: f64, c: u64) -> ProblemSpec {
        ProblemSpec::new(p_min, p_max, alpha, Capacity::integer(c).unwrap()).unwrap()
    }

    /// Runs the fixed-ratio rule on a decreasing trace from
    /// `min{alpha/pi, p_max}` down to `p_min` with `n` levels spaced
    /// geometrically in `alpha − p`, and returns the total charge.
    fn simulate_total(s: &ProblemSpec, pi: f64, n: usize) -> f64 {
        let (alpha, c) = (s.alpha(), s.c());
        let start = (alpha / pi).min(s.p_max());
        let r = ((alpha - s.p_min()) / (alpha - start)).powf(1.0 / (n - 1) as f64);
        let mut eta = alpha * c;
        let mut total = 0.0;
        for k in 0..n {
            let p = alpha - (alpha - start) * r.powi(k as i32);
            let opt = p * c;
            let v = (eta - opt * pi).max(0.0) / (alpha - p);
            eta -= (alpha - p) * v;
            total += v;
        }
        total
    }

    #[test]
    fn v_at_one_with_large_alpha() {
        let s = spec(1.0, 5.0, 20.0, 5);
        let v = max_total_charge(&s, 1.0).unwrap();
        let expected = 5.0 + 5.0 * (19.0f64 / 15.0).ln();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 6.1819).abs() < 1e-4);
        assert!((simulate_total(&s, 1.0, 100_000) - v).abs() < 1e-3);
    }

    #[test]
    fn v_at_two_matches_simulation() {
        let s = spec(1.0, 5.0, 20.0, 5);
        let v = max_total_charge(&s, 2.0).unwrap();
        assert!((v - 5.6972).abs() < 1e-4);
        assert!((simulate_total(&s, 2.0, 100_000) - v).abs() < 1e-3);
    }

    #[test]
    fn v_vanishes_when_opening_price_below_p_min() {
        let s = spec(1.0, 5.0, 4.0, 3);
        assert_eq!(max_total_charge(&s, 4.0).unwrap(), 0.0);
        assert_eq!(max_total_charge(&s, 9.0).unwrap(), 0.0);
    }

    #[test]
    fn v_diverges_at_one_below_p_max() {
        let s = spec(1.0, 5.0, 5.0, 1);
        assert!(matches!(max_total_charge(&s, 1.0), Err(Error::DegenerateAtPiOne)));
        assert!(max_total_charge(&s, 0.5).is_err());
    }

    #[test]
    fn v_continuous_at_branch_boundaries() {
        let s = spec(1.0, 5.0, 12.0, 2);
        for b in [12.0 / 5.0, 12.0] {
            let lo = max_total_charge(&s, b * (1.0 - 1e-12)).unwrap();
            let hi = max_total_charge(&s, b * (1.0 + 1e-12)).unwrap();
            assert!((lo - hi).abs() < 1e-8, "{lo} vs {hi}");
        }
    }

    #[test]
    fn alpha_star_for_theta_five() {
        let s = spec(1.0, 5.0, 5.0, 1);
        let a = solve_alpha_star(&s).unwrap();
        assert!(a > 15.5 && a < 15.55, "alpha* = {a}");
        assert!(threshold_gap(1.0, 5.0, a).abs() < 1e-9);
    }

    #[test]
    fn alpha_star_without_spread() {
        let s = spec(1.0, 1.0, 2.0, 1);
        assert!(matches!(solve_alpha_star(&s), Err(Error::NoBracket(_))));
        let s = spec(1.0, 1.0 + 1e-12, 2.0, 1);
        assert!(matches!(solve_alpha_star(&s), Err(Error::NoBracket(_))));
    }

    #[test]
    fn alpha_star_approaches_p_max_as_spread_vanishes() {
        // alpha* − p_max → (p_max − p_min)/(e − 1)
        let eps = 1e-4;
        let s = spec(1.0, 1.0 + eps, 2.0, 1);
        let a = solve_alpha_star(&s).unwrap();
        let predicted = 1.0 + eps + eps / (std::f64::consts::E - 1.0);
        assert!((a - predicted).abs() < 1e-6, "{a} vs {predicted}");
    }

    #[test]
    fn pi_star_root_branch() {
        let s = spec(1.0, 5.0, 5.0, 1);
        let sol = solve_pi_star(&s);
        assert_eq!(sol.branch, RatioBranch::Root);
        assert!((sol.pi_star - 1.893).abs() < 1e-3, "pi* = {}", sol.pi_star);
        assert!(sol.pi_star <= 5f64.sqrt());
        assert!(sol.residual <= CHARGE_TOL);
        assert!(ratio_gap(1.0, 5.0, sol.pi_star).abs() <= ROOT_TOL);
    }

    #[test]
    fn pi_star_closed_form_is_asymptotically_theta() {
        let s = spec(1.0, 5.0, 1e6, 1);
        let sol = solve_pi_star(&s);
        assert_eq!(sol.branch, RatioBranch::ClosedForm);
        assert!((sol.pi_star - 5.0).abs() < 1e-3);
        assert!(sol.pi_star < 1e6 / 5.0);
    }

    #[test]
    fn pi_star_degenerate_at_p_min() {
        let s = spec(1.0, 5.0, 1.0, 3);
        let sol = solve_pi_star(&s);
        assert_eq!(sol.branch, RatioBranch::Degenerate);
        assert_eq!(sol.pi_star, 1.0);
        let flat = spec(2.0, 2.0, 3.0, 3);
        let sol = solve_pi_star(&flat);
        assert_eq!(sol.pi_star, 1.0);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn pi_star_is_independent_of_capacity() {
        for alpha in [1.5, 5.0, 13.0, 40.0] {
            let a = solve_pi_star(&spec(1.0, 5.0, alpha, 1));
            let b = solve_pi_star(&spec(1.0, 5.0, alpha, 7));
            assert!((a.pi_star - b.pi_star).abs() <= 1e-12);
        }
    }

    #[test]
    fn upper_bound_examples() {
        assert_eq!(pi_star_upper_bound(&spec(1.0, 5.0, 4.0, 1)), 2.0);
        assert_eq!(pi_star_upper_bound(&spec(1.0, 5.0, 100.0, 1)), 5.0);
        assert_eq!(pi_star_upper_bound(&spec(1.0, 5.0, 25.0, 1)), 5.0);
    }

    #[test]
    fn adaptive_target_motivating_example() {
        let s = spec(1.0, 5.0, 5.0, 1);
        let sol = solve_pi_star(&s);
        let ctx = AdaptiveRatioContext::initial(&s, 1.0, sol.pi_star);
        let pi1 = solve_pi_t(&ctx, &s, 1.0).unwrap();
        assert!((pi1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_target_at_worst_case_opening_equals_pi_star() {
        for alpha in [3.0, 5.0, 12.0, 30.0, 200.0] {
            let s = spec(1.0, 5.0, alpha, 2);
            let sol = solve_pi_star(&s);
            let ctx = AdaptiveRatioContext::initial(&s, s.c(), sol.pi_star);
            let opening = (alpha / sol.pi_star).min(s.p_max());
            // evaluate the closed form directly: the no-charge guard must not fire here
            let gap = alpha - opening;
            let denom = s.c() * ((alpha - 1.0) / gap).ln() - s.c() * opening / gap;
            let raw = (s.c() - ctx.eta_prev / gap) / denom;
            assert!((raw - sol.pi_star).abs() < 1e-6, "alpha {alpha}: {raw}");
            let pi1 = solve_pi_t(&ctx, &s, opening).unwrap();
            assert!((pi1 - sol.pi_star).abs() < 1e-6);
        }
    }

    #[test]
    fn v_t_reduces_to_v_without_history() {
        let s = spec(1.0, 5.0, 8.0, 3);
        for pi in [1.3, 1.8, 2.5] {
            let ctx = AdaptiveRatioContext::initial(&s, s.c(), pi);
            let price = (s.alpha() / pi).min(s.p_max());
            let a = max_total_charge_from(&ctx, &s, pi, price);
            let b = max_total_charge(&s, pi).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn v_t_hits_capacity_at_solved_target_and_decreases() {
        let s = spec(1.0, 5.0, 8.0, 2);
        let sol = solve_pi_star(&s);
        let ctx = AdaptiveRatioContext::initial(&s, s.c(), sol.pi_star);
        let price = 2.0;
        let pi = solve_pi_t(&ctx, &s, price).unwrap();
        let v = max_total_charge_from(&ctx, &s, pi, price);
        assert!((v - s.c()).abs() < 1e-9 * s.c());
        assert!(max_total_charge_from(&ctx, &s, pi + 0.1, price) < v);
    }

    #[test]
    fn denominator_sign_violation_is_reported() {
        // a price above alpha flips the sign of the denominator
        let s = spec(1.0, 5.0, 3.0, 1);
        let ctx = AdaptiveRatioContext::initial(&s, 1.0, 1.5);
        assert!(matches!(
            solve_pi_t(&ctx, &s, 4.0),
            Err(Error::DenominatorSignViolation(_))
        ));
    }
}
