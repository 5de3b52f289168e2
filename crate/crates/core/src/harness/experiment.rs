use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::ingest::{ingest_prices, ingest_rows, Episode, Ingested};
use super::report::{aggregate, AlphaRow, CompareRow, RateRow, SeriesRow, SummaryRow};
use super::synthetic::{generate, SyntheticParams};
use crate::error::{Error, Result};
use crate::offline::{opt_rate_limited, OfflineState};
use crate::online::PolicyKind;
use crate::problem::{evaluate_objective, Capacity, ChargingSchedule, ObjectiveValue, PriceTrace, ProblemSpec};
use crate::ratio::{solve_pi_star, RatioSolution};

/// Slack on the per-slot guarantee `η^t ≤ pi*·OPT(t)`.
pub const GUARANTEE_TOL: f64 = 1e-6;

/// Per-slot trajectory of one policy over one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeRun {
    pub policy: String,
    pub charges: Vec<f64>,
    /// `η^t` after each slot.
    pub eta: Vec<f64>,
    /// Hindsight optimum after each slot, rate-limited for rate-limited
    /// policies.
    pub opt: Vec<f64>,
    pub objective: ObjectiveValue,
    pub opt_objective: f64,
    /// `η^T / OPT(T)`.
    pub ratio: f64,
    /// `Σv / c`.
    pub charged_fraction: f64,
}

impl EpisodeRun {
    pub fn ratio_series(&self) -> impl Iterator<Item = f64> + '_ {
        self.eta.iter().zip(&self.opt).map(|(e, o)| e / o)
    }
}

/// Steps `kind` over `prices`, tracking `η^t` and `OPT(t)`.
///
/// Fails with `InternalConsistency` when a competitive policy breaks its
/// per-slot guarantee or any policy beats the optimum; both indicate a bug.
pub fn run_episode(
    spec: &ProblemSpec,
    ratio: &RatioSolution,
    prices: &[f64],
    kind: PolicyKind,
) -> Result<EpisodeRun> {
    let trace = PriceTrace::new(prices.to_vec(), spec)?;
    let mut policy = kind.build(spec, ratio)?;
    let mut offline = OfflineState::new(spec);
    let (mut charges, mut eta, mut opt) = (
        Vec::with_capacity(prices.len()),
        Vec::with_capacity(prices.len()),
        Vec::with_capacity(prices.len()),
    );
    for (t, &p) in prices.iter().enumerate() {
        let step = policy.step(p, &prices[t + 1..])?;
        offline.step(p);
        let o = if kind.rate_limited() {
            offline.opt_value()
        } else {
            offline.opt_no_limit()
        };
        if kind.is_competitive() && step.eta_after > ratio.pi_star * o + GUARANTEE_TOL {
            return Err(Error::InternalConsistency(format!(
                "{kind} at slot {t}: eta {} exceeds pi* x OPT = {}",
                step.eta_after,
                ratio.pi_star * o
            )));
        }
        charges.push(step.charge);
        eta.push(step.eta_after);
        opt.push(o);
    }
    let schedule = ChargingSchedule::new(charges.clone());
    let objective = evaluate_objective(spec, &trace, &schedule)?;
    let opt_objective = opt.last().copied().unwrap_or(spec.alpha() * spec.c());
    let final_ratio = objective.total / opt_objective;
    if final_ratio < 1.0 - 1e-9 {
        return Err(Error::InternalConsistency(format!(
            "{kind} beat the offline optimum: ratio {final_ratio}"
        )));
    }
    Ok(EpisodeRun {
        policy: kind.to_string(),
        charged_fraction: (schedule.total() / spec.c()).clamp(0.0, 1.0),
        charges,
        eta,
        opt,
        objective,
        opt_objective,
        ratio: final_ratio,
    })
}

fn with_context(ep: &Episode, kind: PolicyKind) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Episode {
        date: ep.date.to_string(),
        policy: kind.to_string(),
        source: Box::new(e),
    }
}

/// Reads the configured price file, or generates the synthetic corpus.
pub fn load_corpus(config: &ExperimentConfig) -> Result<Ingested> {
    match &config.prices {
        Some(path) => ingest_prices(path, config),
        None => {
            let rows = generate(&SyntheticParams::from_config(config), config)?;
            ingest_rows(&rows, config)
        }
    }
}

/// Problem instance for a calibrated corpus.
pub fn build_spec(config: &ExperimentConfig, corpus: &Ingested) -> Result<ProblemSpec> {
    let alpha = config.resolve_alpha(corpus.p_min, corpus.p_max);
    ProblemSpec::new(corpus.p_min, corpus.p_max, alpha, config.capacity)?
        .with_slot_minutes(config.slot_minutes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub spec: ProblemSpec,
    pub ratio: RatioSolution,
    /// Sorted by (date, policy).
    pub rows: Vec<SummaryRow>,
    pub series: Vec<SeriesRow>,
}

/// Runs every configured policy over every episode.
pub fn simulate(config: &ExperimentConfig, corpus: &Ingested) -> Result<Simulation> {
    let spec = build_spec(config, corpus)?;
    let ratio = solve_pi_star(&spec);
    let kinds = config.policy_kinds()?;
    let runs: Vec<Vec<EpisodeRun>> = corpus
        .episodes
        .par_iter()
        .map(|ep| {
            kinds
                .iter()
                .map(|&k| run_episode(&spec, &ratio, &ep.prices, k).map_err(with_context(ep, k)))
                .collect()
        })
        .collect::<Result<_>>()?;

    let kwh = config.kwh_per_unit();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (ep, ep_runs) in corpus.episodes.iter().zip(&runs) {
        let date = ep.date.to_string();
        let mut order: Vec<&EpisodeRun> = ep_runs.iter().collect();
        order.sort_by(|a, b| a.policy.cmp(&b.policy));
        for run in order {
            rows.push(SummaryRow {
                date: date.clone(),
                season: ep.season().to_string(),
                policy: run.policy.clone(),
                alpha: spec.alpha(),
                pi_star: ratio.pi_star,
                cost: run.objective.charging_cost,
                dissatisfaction: run.objective.dissatisfaction,
                objective: run.objective.total,
                opt_objective: run.opt_objective,
                ratio: run.ratio,
                charged_pct: run.charged_fraction,
                charged_kwh: run.charges.iter().sum::<f64>() * kwh,
            });
            for (slot, ((&p, &v), (&e, &o))) in ep
                .prices
                .iter()
                .zip(&run.charges)
                .zip(run.eta.iter().zip(&run.opt))
                .enumerate()
            {
                for (metric, value) in [("price", p), ("charge", v), ("eta", e), ("opt", o), ("ratio", e / o)] {
                    series.push(SeriesRow {
                        date: date.clone(),
                        policy: run.policy.clone(),
                        slot,
                        metric: metric.into(),
                        value,
                    });
                }
            }
        }
    }
    Ok(Simulation {
        spec,
        ratio,
        rows,
        series,
    })
}

/// The divide-and-conquer policy matching the capacity.
fn distributor_kind(capacity: Capacity) -> PolicyKind {
    if capacity.is_integer() {
        PolicyKind::Int
    } else {
        PolicyKind::Rat
    }
}

/// Recomputes `pi*` and reruns the divide-and-conquer policy for every
/// `alpha = multiple·p_min` on the grid.
pub fn sweep_alpha(config: &ExperimentConfig, corpus: &Ingested) -> Result<Vec<AlphaRow>> {
    let base = build_spec(config, corpus)?;
    let kind = distributor_kind(base.capacity());
    config
        .alpha_grid
        .par_iter()
        .map(|&m| {
            let spec = base.with_alpha(m * base.p_min())?;
            let ratio = solve_pi_star(&spec);
            let per_episode: Vec<(f64, f64, f64)> = corpus
                .episodes
                .iter()
                .map(|ep| {
                    let run = run_episode(&spec, &ratio, &ep.prices, kind).map_err(with_context(ep, kind))?;
                    let (_, opt_sched) = opt_rate_limited(&spec, &ep.prices);
                    Ok((run.ratio, run.charged_fraction, opt_sched.total() / spec.c()))
                })
                .collect::<Result<_>>()?;
            let n = per_episode.len().max(1) as f64;
            Ok(AlphaRow {
                alpha_multiple: m,
                alpha: spec.alpha(),
                pi_star: ratio.pi_star,
                policy: kind.to_string(),
                episodes: per_episode.len(),
                mean_ratio: per_episode.iter().map(|r| r.0).sum::<f64>() / n,
                max_ratio: per_episode.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
                charged_pct: per_episode.iter().map(|r| r.1).sum::<f64>() / n,
                opt_charged_pct: per_episode.iter().map(|r| r.2).sum::<f64>() / n,
            })
        })
        .collect()
}

/// Capacity in units of a per-slot cap scaled by `factor`.
pub fn scaled_capacity(capacity: Capacity, factor: f64) -> Result<Capacity> {
    capacity.rescale(Capacity::approximate(factor, 1000)?)
}

/// Scales the per-slot cap by each grid factor with the energy requirement
/// held fixed, i.e. `c ↦ c / factor`. Objectives are reported in units of
/// the nominal cap so that rows are comparable.
pub fn sweep_rate_limit(config: &ExperimentConfig, corpus: &Ingested) -> Result<Vec<RateRow>> {
    let base = build_spec(config, corpus)?;
    config
        .rate_grid
        .par_iter()
        .map(|&factor| {
            let capacity = scaled_capacity(base.capacity(), factor)?;
            let spec = base.with_capacity(capacity)?;
            let kind = distributor_kind(capacity);
            let ratio = solve_pi_star(&spec);
            let per_episode: Vec<(f64, f64)> = corpus
                .episodes
                .iter()
                .map(|ep| {
                    let run = run_episode(&spec, &ratio, &ep.prices, kind).map_err(with_context(ep, kind))?;
                    let (opt, _) = opt_rate_limited(&spec, &ep.prices);
                    Ok((run.objective.total * factor, opt * factor))
                })
                .collect::<Result<_>>()?;
            let n = per_episode.len().max(1) as f64;
            Ok(RateRow {
                rate_factor: factor,
                capacity: capacity.to_string(),
                pi_star: ratio.pi_star,
                policy: kind.to_string(),
                episodes: per_episode.len(),
                mean_objective: per_episode.iter().map(|r| r.0).sum::<f64>() / n,
                mean_opt_objective: per_episode.iter().map(|r| r.1).sum::<f64>() / n,
            })
        })
        .collect()
}

/// Mean ratios per season and policy.
pub fn compare_policies(config: &ExperimentConfig, corpus: &Ingested) -> Result<Vec<CompareRow>> {
    Ok(aggregate(&simulate(config, corpus)?.rows, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::worst_case_no_limit;
    use crate::harness::config::SyntheticModel;

    fn spec(p_min: f64, p_max: f64, alpha: f64, c: u64) -> ProblemSpec {
        ProblemSpec::new(p_min, p_max, alpha, Capacity::integer(c).unwrap()).unwrap()
    }

    #[test]
    fn fixed_on_worst_case_holds_ratio_flat() {
        let s = spec(1.0, 5.0, 5.0, 1);
        let sol = solve_pi_star(&s);
        let tr = worst_case_no_limit(&s, sol.pi_star, 2000).unwrap();
        let run = run_episode(&s, &sol, tr.prices.prices(), PolicyKind::Fixed).unwrap();
        for r in run.ratio_series() {
            assert!((r - sol.pi_star).abs() < 0.01);
        }
    }

    #[test]
    fn motivating_example() {
        let s = spec(1.0, 5.0, 5.0, 1);
        let sol = solve_pi_star(&s);
        let run = run_episode(&s, &sol, &[1.0], PolicyKind::Adaptive).unwrap();
        assert_eq!(run.ratio, 1.0);
        assert_eq!(run.charged_fraction, 1.0);
    }

    #[test]
    fn alpha_at_p_min_never_charges() {
        let s = spec(2.0, 6.0, 2.0, 3);
        let sol = solve_pi_star(&s);
        let prices = [2.0, 3.0, 6.0, 2.0];
        for kind in [PolicyKind::Fixed, PolicyKind::Adaptive, PolicyKind::Int, PolicyKind::Rat] {
            let run = run_episode(&s, &sol, &prices, kind).unwrap();
            assert_eq!(run.charged_fraction, 0.0, "{kind}");
            assert_eq!(run.ratio, 1.0, "{kind}");
        }
    }

    #[test]
    fn full_window_rhc_is_offline_when_alpha_covers_prices() {
        let s = spec(1.0, 5.0, 5.0, 3);
        let sol = solve_pi_star(&s);
        let prices = [4.0, 2.0, 3.5, 1.5, 4.5, 2.5, 1.0, 3.0];
        let run = run_episode(&s, &sol, &prices, PolicyKind::Rhc(prices.len())).unwrap();
        assert!((run.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn naive_above_threshold_charges_nothing() {
        let s = spec(1.0, 5.0, 5.0, 2);
        let sol = solve_pi_star(&s);
        let run = run_episode(&s, &sol, &[4.0, 3.5, 3.0], PolicyKind::Naive).unwrap();
        assert_eq!(run.charged_fraction, 0.0);
        assert_eq!(run.objective.total, 10.0);
    }

    #[test]
    fn scaled_capacity_is_exact() {
        let c = Capacity::integer(24).unwrap();
        assert_eq!(scaled_capacity(c, 0.5).unwrap(), Capacity::integer(48).unwrap());
        assert_eq!(scaled_capacity(c, 1.25).unwrap(), Capacity::new(96, 5).unwrap());
        assert_eq!(scaled_capacity(c, 1.5).unwrap(), Capacity::integer(16).unwrap());
    }

    #[test]
    fn small_rate_corpus_runs_end_to_end() {
        let mut cfg = ExperimentConfig::default();
        cfg.synthetic_days = 3;
        cfg.synthetic_model = SyntheticModel::EveningDecline;
        let corpus = load_corpus(&cfg).unwrap();
        let sim = simulate(&cfg, &corpus).unwrap();
        assert_eq!(sim.rows.len(), 3 * 6);
        assert_eq!(sim.series.len(), 3 * 6 * 180 * 5);
        for r in &sim.rows {
            assert!(r.ratio >= 1.0 - 1e-9);
            assert!((0.0..=1.0).contains(&r.charged_pct));
        }
        let rates = sweep_rate_limit(&cfg, &corpus).unwrap();
        assert_eq!(rates.len(), cfg.rate_grid.len());
        let compare = compare_policies(&cfg, &corpus).unwrap();
        assert_eq!(compare.len(), 6);
    }
}
