//! Trace-driven evaluation: configuration, price ingestion, synthetic
//! corpora, experiment loops and report files.

pub mod config;
pub mod experiment;
pub mod ingest;
pub mod report;
pub mod synthetic;

pub use config::{parse_grid, ExperimentConfig, OutOfRange, SyntheticModel};
pub use experiment::{
    build_spec, compare_policies, load_corpus, run_episode, simulate, sweep_alpha, sweep_rate_limit,
    EpisodeRun, Simulation,
};
pub use ingest::{calibrate, ingest_prices, ingest_rows, read_price_csv, Episode, Ingested, PriceRow, Season};
pub use report::{aggregate, read_summary, AlphaRow, CompareRow, Format, RateRow, SeriesRow, SummaryRow};
