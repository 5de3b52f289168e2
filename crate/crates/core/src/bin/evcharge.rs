use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evcharge::adversary::{worst_case_no_limit, worst_case_rate_limited};
use evcharge::error::{Error, Result};
use evcharge::harness::report::{encode, write_file};
use evcharge::harness::synthetic::{generate, write_price_csv, SyntheticParams};
use evcharge::harness::{
    aggregate, load_corpus, parse_grid, read_summary, simulate, sweep_alpha, sweep_rate_limit, AlphaRow,
    CompareRow, ExperimentConfig, Format, RateRow, SeriesRow, SummaryRow, SyntheticModel,
};
use evcharge::problem::{Capacity, ProblemSpec};
use evcharge::ratio::{max_total_charge, solve_pi_star};

/// Online EV charging under real-time prices.
#[derive(Debug, Parser)]
#[command(name = "evcharge", version)]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the optimal competitive ratio.
    SolveRatio {
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value = "1")]
        capacity: Capacity,
        /// Print JSON instead of key = value lines.
        #[arg(long)]
        json: bool,
    },
    /// Write a worst-case price trace as CSV.
    Adversary {
        /// Ratio to pin; defaults to the optimal ratio.
        #[arg(long)]
        pi: Option<f64>,
        #[arg(long)]
        steps: usize,
        /// Output file, `-` for stdout.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p_min: f64,
        #[arg(long, default_value_t = 5.0)]
        p_max: f64,
        #[arg(long, default_value_t = 5.0)]
        alpha: f64,
        #[arg(long, default_value = "1")]
        capacity: Capacity,
        /// Repeat every level once per unit of capacity.
        #[arg(long)]
        rate_limited: bool,
    },
    /// Run policies over a price corpus and write reports.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated policies, e.g. `fixed,int,rhc:0,naive`.
        #[arg(long)]
        policies: Option<String>,
    },
    /// Sweep the dissatisfaction price or the charging rate.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Multiples of p_min, comma-separated.
        #[arg(long, conflicts_with = "rate_grid", required_unless_present = "rate_grid")]
        alpha_grid: Option<String>,
        /// Rate factors, comma-separated.
        #[arg(long)]
        rate_grid: Option<String>,
    },
    /// Summarise a summary file per policy.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Group by season as well.
        #[arg(long)]
        by_season: bool,
        /// Output file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic price CSV.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "regime")]
        model: SyntheticModel,
        #[arg(long, default_value_t = 28)]
        days: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

/// Options shared by the corpus-driven subcommands; they override the config
/// file.
#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Price CSV; a seeded synthetic corpus is used when omitted.
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha_multiple: Option<f64>,
    #[arg(long)]
    capacity: Option<Capacity>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(p) = &self.prices {
            cfg.prices = Some(p.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = Some(a);
        }
        if let Some(m) = self.alpha_multiple {
            cfg.alpha = None;
            cfg.alpha_multiple = Some(m);
        }
        if let Some(c) = self.capacity {
            cfg.capacity = c;
        }
        if let Some(d) = &self.out_dir {
            cfg.output_dir = d.clone();
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::SolveRatio {
            p_min,
            p_max,
            alpha,
            capacity,
            json,
        } => solve_ratio(&ProblemSpec::new(p_min, p_max, alpha, capacity)?, json),
        Command::Adversary {
            pi,
            steps,
            out,
            p_min,
            p_max,
            alpha,
            capacity,
            rate_limited,
        } => {
            let spec = ProblemSpec::new(p_min, p_max, alpha, capacity)?;
            let trace = if rate_limited {
                if pi.is_some() {
                    return Err(Error::Config("--pi cannot be combined with --rate-limited".into()));
                }
                worst_case_rate_limited(&spec, steps)?
            } else {
                let pi = pi.unwrap_or_else(|| solve_pi_star(&spec).pi_star);
                worst_case_no_limit(&spec, pi, steps)?
            };
            let mut buf = String::from("slot,price\n");
            for (k, p) in trace.prices.prices().iter().enumerate() {
                buf.push_str(&format!("{k},{p}\n"));
            }
            emit(&out, buf.as_bytes())?;
            log::info!(
                "{} slots over {} levels, target ratio {}",
                trace.prices.len(),
                trace.steps,
                trace.achieved_ratio_target
            );
            Ok(())
        }
        Command::Simulate { common, policies } => {
            let mut cfg = common.resolve()?;
            if let Some(p) = policies {
                cfg.policies = p;
            }
            cfg.validate()?;
            let corpus = load_corpus(&cfg)?;
            let sim = simulate(&cfg, &corpus)?;
            let dir = &cfg.output_dir;
            write_file(&dir.join("summary.csv"), Format::Csv, &SummaryRow::HEADER, &sim.rows)?;
            write_file(&dir.join("summary.json"), Format::Json, &SummaryRow::HEADER, &sim.rows)?;
            write_file(&dir.join("series.csv"), Format::Csv, &SeriesRow::HEADER, &sim.series)?;
            eprintln!(
                "{} episodes, p in [{}, {}], alpha = {}, pi* = {}; reports in {}",
                corpus.episodes.len(),
                sim.spec.p_min(),
                sim.spec.p_max(),
                sim.spec.alpha(),
                sim.ratio.pi_star,
                dir.display()
            );
            print_bytes(&encode(Format::Csv, &CompareRow::HEADER, &aggregate(&sim.rows, false)))
        }
        Command::Sweep {
            common,
            alpha_grid,
            rate_grid,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(g) = &alpha_grid {
                cfg.alpha_grid = parse_grid(g)?;
            }
            if let Some(g) = &rate_grid {
                cfg.rate_grid = parse_grid(g)?;
            }
            cfg.validate()?;
            let corpus = load_corpus(&cfg)?;
            let dir = &cfg.output_dir;
            if alpha_grid.is_some() {
                let rows = sweep_alpha(&cfg, &corpus)?;
                write_file(&dir.join("alpha_sweep.csv"), Format::Csv, &AlphaRow::HEADER, &rows)?;
                write_file(&dir.join("alpha_sweep.json"), Format::Json, &AlphaRow::HEADER, &rows)?;
                print_bytes(&encode(Format::Csv, &AlphaRow::HEADER, &rows))
            } else {
                let rows = sweep_rate_limit(&cfg, &corpus)?;
                write_file(&dir.join("rate_sweep.csv"), Format::Csv, &RateRow::HEADER, &rows)?;
                write_file(&dir.join("rate_sweep.json"), Format::Json, &RateRow::HEADER, &rows)?;
                print_bytes(&encode(Format::Csv, &RateRow::HEADER, &rows))
            }
        }
        Command::Report {
            input,
            format,
            by_season,
            out,
        } => {
            let rows = aggregate(&read_summary(&input)?, by_season);
            let bytes = encode(format, &CompareRow::HEADER, &rows);
            match out {
                Some(path) => emit(&path, &bytes),
                None => print_bytes(&bytes),
            }
        }
        Command::Synth {
            out,
            model,
            days,
            seed,
        } => {
            let cfg = ExperimentConfig::default();
            let mut params = SyntheticParams::from_config(&cfg);
            params.model = model;
            params.days = days;
            params.seed = seed;
            write_price_csv(&out, &generate(&params, &cfg)?)
        }
    }
}

fn solve_ratio(spec: &ProblemSpec, json: bool) -> Result<()> {
    let sol = solve_pi_star(spec);
    let charge = max_total_charge(spec, sol.pi_star).unwrap_or(spec.c());
    if json {
        let value = serde_json::json!({
            "p_min": spec.p_min(),
            "p_max": spec.p_max(),
            "alpha": spec.alpha(),
            "capacity": spec.capacity().to_string(),
            "solution": sol,
            "max_total_charge": charge,
        });
        let text = serde_json::to_string_pretty(&value)
            .map_err(|e| Error::InternalConsistency(e.to_string()))?;
        return print_bytes(format!("{text}\n").as_bytes());
    }
    let alpha_star = sol.alpha_star.map_or("none".to_string(), |a| a.to_string());
    let text = format!(
        "pi_star = {}\nbranch = {:?}\nalpha_star = {}\nupper_bound = {}\nmax_total_charge = {}\n",
        sol.pi_star, sol.branch, alpha_star, sol.upper_bound, charge
    );
    print_bytes(text.as_bytes())
}

fn emit(path: &Path, bytes: &[u8]) -> Result<()> {
    if path.as_os_str() == "-" {
        return print_bytes(bytes);
    }
    std::fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_bytes(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        })
}
