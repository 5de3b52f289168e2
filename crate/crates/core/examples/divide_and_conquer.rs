//! Rate-limited charging by splitting capacity into unit sub-problems.
//!
//! `cargo run --example divide_and_conquer`

use evcharge::offline::OfflineState;
use evcharge::online::{DistributorState, SubPolicy};
use evcharge::problem::{Capacity, ProblemSpec};
use evcharge::ratio::solve_pi_star;

fn main() -> evcharge::error::Result<()> {
    let spec = ProblemSpec::new(1.0, 5.0, 5.0, Capacity::new(5, 2)?)?;
    let pi = solve_pi_star(&spec).pi_star;
    let mut dist = DistributorState::new_rat(&spec, pi, SubPolicy::Fixed);
    let mut offline = OfflineState::new(&spec);

    for p in [4.0, 3.0, 3.0, 2.0, 4.5, 1.5, 1.0] {
        let step = dist.step(p)?;
        offline.step(p);
        let eta_sum: f64 = dist.sub_etas().iter().sum();
        println!(
            "price {p:>3}  charge {:.3}  eta {:.4} (sum of parts {:.4})  OPT {:.3} (sum of parts {:.3})",
            step.charge,
            step.eta_after,
            eta_sum,
            offline.opt_value(),
            dist.sub_opt_sum()
        );
    }
    println!("sub-problem charges: {:?}", dist.sub_charged());

    // integer capacity with more slots than units routes each price to one unit
    let spec = spec.with_capacity(Capacity::integer(2)?)?;
    let mut int = DistributorState::new_int(&spec, solve_pi_star(&spec).pi_star, SubPolicy::Adaptive)?;
    for p in [3.0, 2.0, 2.5, 1.0] {
        int.step(p)?;
    }
    println!("int, mu after four prices: {:?}", int.mu());
    Ok(())
}
