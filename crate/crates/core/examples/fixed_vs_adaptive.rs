//! Fixed-ratio and adaptive policies on the same trace.
//!
//! `cargo run --example fixed_vs_adaptive`

use evcharge::online::{AdaptiveState, FixedRatioState};
use evcharge::problem::{Capacity, ProblemSpec};
use evcharge::ratio::solve_pi_star;

fn main() -> evcharge::error::Result<()> {
    let spec = ProblemSpec::new(1.0, 5.0, 5.0, Capacity::integer(1)?)?;
    let pi = solve_pi_star(&spec).pi_star;
    let mut fixed = FixedRatioState::new(&spec, pi);
    let mut adaptive = AdaptiveState::new(&spec, pi);

    let prices = [4.2, 3.1, 3.6, 2.4, 1.9, 2.8, 1.2];
    println!("pi* = {pi:.4}");
    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "price", "fixed v", "fixed r", "adapt v", "target");
    let mut low = f64::INFINITY;
    for p in prices {
        low = low.min(p);
        let f = fixed.step(p)?;
        let a = adaptive.step(p)?;
        println!(
            "{p:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            f.charge,
            f.eta_after / (low.min(spec.alpha()) * spec.c()),
            a.charge,
            adaptive.target()
        );
    }

    // a single price at p_min: adaptive knows nothing cheaper can follow
    let mut a = AdaptiveState::new(&spec, pi);
    let step = a.step(1.0)?;
    println!("opening at p_min: adaptive target {:?}, charge {}", step.target_ratio, step.charge);
    Ok(())
}
