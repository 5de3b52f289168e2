//! Worst-case traces and the adaptive adversary.
//!
//! `cargo run --example adversary_duel`

use evcharge::adversary::{adaptive_adversary, worst_case_no_limit};
use evcharge::online::PolicyKind;
use evcharge::problem::{Capacity, ProblemSpec};
use evcharge::ratio::solve_pi_star;

fn main() -> evcharge::error::Result<()> {
    let spec = ProblemSpec::new(1.0, 5.0, 5.0, Capacity::integer(1)?)?;
    let sol = solve_pi_star(&spec);
    let trace = worst_case_no_limit(&spec, sol.pi_star, 8)?;
    println!("8-level worst case: {:.3?}", trace.prices.prices());

    println!("pi* = {:.4}", sol.pi_star);
    for kind in [
        PolicyKind::Fixed,
        PolicyKind::Adaptive,
        PolicyKind::Int,
        PolicyKind::Rat,
        PolicyKind::Rhc(0),
        PolicyKind::Rhc(12),
        PolicyKind::Naive,
    ] {
        let mut policy = kind.build(&spec, &sol)?;
        let (played, ratio) = adaptive_adversary(policy.as_mut(), &spec, 10_000)?;
        println!("{:>10}: ratio {ratio:.4} after {} slots", kind.to_string(), played.prices.len());
    }
    Ok(())
}
