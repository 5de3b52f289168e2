//! All policies over a synthetic corpus, averaged per season.
//!
//! `cargo run --release --example compare_policies`

use evcharge::harness::{compare_policies, load_corpus, ExperimentConfig, SyntheticModel};

fn main() -> evcharge::error::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.synthetic_model = SyntheticModel::EveningDecline;
    cfg.synthetic_days = 365;
    cfg.policies = "fixed,adaptive,int,int-adaptive,rat,rhc:0,rhc:12,naive".into();
    let corpus = load_corpus(&cfg)?;
    println!("{:<8} {:<14} {:>5} {:>10} {:>10} {:>10}", "season", "policy", "n", "mean", "max", "charged");
    for r in compare_policies(&cfg, &corpus)? {
        println!(
            "{:<8} {:<14} {:>5} {:>10.4} {:>10.4} {:>9.1}%",
            r.season,
            r.policy,
            r.episodes,
            r.mean_ratio,
            r.max_ratio,
            100.0 * r.mean_charged_pct
        );
    }
    Ok(())
}
