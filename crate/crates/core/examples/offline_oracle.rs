//! Hindsight optima with and without a per-slot rate limit.
//!
//! `cargo run --example offline_oracle`

use evcharge::offline::{opt_no_limit, opt_rate_limited, OfflineState};
use evcharge::problem::{Capacity, ProblemSpec};

fn main() -> evcharge::error::Result<()> {
    let spec = ProblemSpec::new(1.0, 5.0, 4.0, Capacity::new(5, 2)?)?;
    let prices = [4.5, 3.0, 2.0, 3.5, 1.5, 2.5, 4.8];

    println!("no limit:     {:.3}", opt_no_limit(&spec, &prices));
    let (value, schedule) = opt_rate_limited(&spec, &prices);
    println!("rate limited: {value:.3}");
    for (p, v) in prices.iter().zip(schedule.as_slice()) {
        println!("  price {p:>4}  charge {v:.2}");
    }

    // the same optimum, maintained online one price at a time
    let mut state = OfflineState::new(&spec);
    for &p in &prices {
        state.step(p);
        println!("t = {}  OPT(t) = {:.3}  min = {}", state.t(), state.opt_value(), state.running_min());
    }
    Ok(())
}
