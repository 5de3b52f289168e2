//! Sensitivity to the dissatisfaction price and to the charging rate.
//!
//! `cargo run --release --example sweeps`

use evcharge::harness::{load_corpus, sweep_alpha, sweep_rate_limit, ExperimentConfig};

fn main() -> evcharge::error::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.alpha_grid = vec![1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0];
    let corpus = load_corpus(&cfg)?;

    println!("{:>6} {:>8} {:>8} {:>10} {:>9} {:>9}", "mult", "alpha", "pi*", "ratio", "ALG %", "OPT %");
    for r in sweep_alpha(&cfg, &corpus)? {
        println!(
            "{:>6} {:>8.3} {:>8.4} {:>10.4} {:>8.1}% {:>8.1}%",
            r.alpha_multiple,
            r.alpha,
            r.pi_star,
            r.mean_ratio,
            100.0 * r.charged_pct,
            100.0 * r.opt_charged_pct
        );
    }

    println!("{:>6} {:>9} {:>8} {:>12} {:>12}", "rate", "capacity", "pi*", "ALG", "OPT");
    for r in sweep_rate_limit(&cfg, &corpus)? {
        println!(
            "{:>6} {:>9} {:>8.4} {:>12.3} {:>12.3}",
            r.rate_factor, r.capacity, r.pi_star, r.mean_objective, r.mean_opt_objective
        );
    }
    Ok(())
}
