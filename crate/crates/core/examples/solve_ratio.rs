//! Optimal competitive ratio across dissatisfaction prices.
//!
//! `cargo run --example solve_ratio`

use evcharge::problem::{Capacity, ProblemSpec};
use evcharge::ratio::{max_total_charge, solve_alpha_star, solve_pi_star};

fn main() -> evcharge::error::Result<()> {
    let c = Capacity::integer(1)?;
    let base = ProblemSpec::new(1.0, 5.0, 5.0, c)?;
    println!("alpha* = {:.4}", solve_alpha_star(&base)?);
    println!("{:>8} {:>10} {:>12} {:>10}", "alpha", "pi*", "branch", "bound");
    for alpha in [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 15.0, 20.0, 50.0, 1e3, 1e6] {
        let spec = base.with_alpha(alpha)?;
        let sol = solve_pi_star(&spec);
        println!(
            "{alpha:>8} {:>10.6} {:>12?} {:>10.4}",
            sol.pi_star, sol.branch, sol.upper_bound
        );
    }

    // V is the largest total charge an adversary can force at a given target
    let sol = solve_pi_star(&base);
    for pi in [1.5, sol.pi_star, 2.5] {
        println!("V({pi:.4}) = {:.6}", max_total_charge(&base, pi)?);
    }
    Ok(())
}
