use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gdopsel::harness::{
    gdop_map, run_trials, summarize, summarize_trials_csv, write_gdop_map_csv, write_outputs, ExperimentConfig,
    StrategySummary,
};
use gdopsel::measurement::{Backend, NoiseModel};
use gdopsel::scenario::{gen_ioo, gen_umi, IooParams, Scenario, ScenarioKind, UmiParams};
use gdopsel::selection::Strategy;

#[derive(Parser)]
#[command(name = "gdopsel", version, about = "Monte-Carlo study of base-station selection for TDOA fixes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo comparison of selection strategies.
    Run(RunArgs),
    /// Write GDOP over a grid covering a scenario file.
    GdopMap {
        #[arg(long)]
        scenario_file: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        grid_step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-strategy error percentiles from a trials.csv.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        percentile: f64,
    },
    /// Generate one scenario and write it as TOML.
    Scenario {
        #[arg(long)]
        scenario: ScenarioKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n_los: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Flags left unset fall back to `--config`, then to the scenario defaults.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "n-bs")]
    n_bs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// LOS stations per trial.
    #[arg(long)]
    n_los: Option<usize>,
    /// TDOA noise standard deviation, meters.
    #[arg(long)]
    sigma: Option<f64>,
    /// Mean NLOS excess range, meters.
    #[arg(long)]
    nlos_bias: Option<f64>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.scenario) {
            (Some(path), _) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
            (None, Some(kind)) => ExperimentConfig::new(kind),
            (None, None) => bail!("either --scenario or --config is required"),
        };
        if let Some(kind) = self.scenario {
            if kind != cfg.scenario {
                // switching scenario also switches the noise defaults, unless given explicitly
                cfg = ExperimentConfig { scenario: kind, noise: ExperimentConfig::new(kind).noise, ..cfg };
            }
        }
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.n_select = self.n_bs.unwrap_or(cfg.n_select);
        cfg.strategies = self.strategies.unwrap_or(cfg.strategies);
        cfg.backend = self.backend.unwrap_or(cfg.backend);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.out = self.out.unwrap_or(cfg.out);
        cfg.n_los = self.n_los.or(cfg.n_los);
        cfg.noise = NoiseModel::new(
            self.sigma.unwrap_or(cfg.noise.sigma_tdoa),
            self.nlos_bias.unwrap_or(cfg.noise.nlos_bias_mean),
        )?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_summary(rows: &[(StrategySummary, Option<f64>)], p: f64) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    println!(
        "{:<10} {:>6} {:>8} {:>10} {:>10} {:>10}",
        "strategy",
        "fixes",
        "skipped",
        "unconv",
        "p50_m",
        format!("p{}_m", p * 100.0)
    );
    for (s, at_p) in rows {
        println!(
            "{:<10} {:>6} {:>8} {:>10} {:>10} {:>10}",
            s.strategy,
            s.fixes,
            s.skipped,
            s.not_converged,
            fmt(s.median_m),
            fmt(*at_p)
        );
    }
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = args.into_config()?;
    log::info!("running {} {:?} trials with seed {}", cfg.trials, cfg.scenario, cfg.seed);
    let records = run_trials(&cfg)?;
    let written = write_outputs(&cfg, &records, &cfg.out)?;
    for path in &written {
        log::info!("wrote {}", path.display());
    }
    let reports: Vec<_> = records.iter().flat_map(|r| r.reports.iter().cloned()).collect();
    let rows: Vec<_> = summarize(&reports, &cfg.strategies)
        .into_iter()
        .map(|s| {
            let p90 = s.p90_m;
            (s, p90)
        })
        .collect();
    print_summary(&rows, 0.9);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args)?,
        Command::GdopMap { scenario_file, grid_step, out } => {
            let scenario =
                Scenario::load(&scenario_file).with_context(|| format!("reading {}", scenario_file.display()))?;
            let cells = gdop_map(&scenario, grid_step)?;
            write_gdop_map_csv(&cells, BufWriter::new(File::create(&out)?))?;
            log::info!("wrote {} cells to {}", cells.len(), out.display());
        }
        Command::Stats { input, percentile } => {
            let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            print_summary(&summarize_trials_csv(file, percentile)?, percentile);
        }
        Command::Scenario { scenario, seed, n_los, out } => {
            let s = match scenario {
                ScenarioKind::Umi => {
                    let d = UmiParams::default();
                    gen_umi(seed, &UmiParams { n_los: n_los.unwrap_or(d.n_los), ..d })?
                }
                ScenarioKind::Ioo => {
                    let d = IooParams::default();
                    gen_ioo(seed, &IooParams { n_los: n_los.unwrap_or(d.n_los), ..d })?
                }
            };
            s.save(&out)?;
        }
    }
    Ok(())
}
