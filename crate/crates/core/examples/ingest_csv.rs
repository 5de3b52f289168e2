//! Loading a price CSV: calibration, nightly windows, out-of-range handling.
//!
//! `cargo run --example ingest_csv [prices.csv]`

use std::path::PathBuf;

use evcharge::harness::synthetic::{generate, write_price_csv, SyntheticParams};
use evcharge::harness::{ingest_prices, ExperimentConfig, OutOfRange};

fn main() -> evcharge::error::Result<()> {
    let mut cfg = ExperimentConfig::default();
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let path = std::env::temp_dir().join("evcharge-example-prices.csv");
            let mut params = SyntheticParams::from_config(&cfg);
            params.days = 14;
            write_price_csv(&path, &generate(&params, &cfg)?)?;
            println!("wrote a synthetic corpus to {}", path.display());
            path
        }
    };

    for mode in [OutOfRange::Clamp, OutOfRange::Drop] {
        cfg.out_of_range = mode;
        let corpus = ingest_prices(&path, &cfg)?;
        println!(
            "{mode:?}: p in [{:.4}, {:.4}], {} episodes, {} clamped, {} dropped out of range, {} dropped for gaps",
            corpus.p_min,
            corpus.p_max,
            corpus.episodes.len(),
            corpus.clamped,
            corpus.dropped_out_of_range,
            corpus.dropped_gaps
        );
    }
    cfg.out_of_range = OutOfRange::Clamp;
    let corpus = ingest_prices(&path, &cfg)?;
    if let Some(e) = corpus.episodes.first() {
        println!("{} ({}): {} slots, first {:.3?}", e.date, e.season(), e.prices.len(), &e.prices[..4]);
    }
    Ok(())
}
