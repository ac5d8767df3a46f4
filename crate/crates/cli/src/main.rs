use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;
mod validate;

use commands::{Context, Summary};
use config::{ConfigError, ExperimentConfig};
use output::Cache;

#[derive(Parser)]
#[command(name = "ghzsim", version, about = "Steady states, Markov reductions and rate tuning for GHZ reservoirs")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every logical core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Neither read nor write cached points.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Verb {
    /// Steady state per size with the analytic and chain estimates.
    Steady,
    /// Steady states over the `[[sweep]]` grid.
    Sweep,
    /// Classical chains, closed forms and frontier checks.
    Markov,
    /// Grid search for the rates minimizing the error.
    Tune,
    /// Built-in oracle suite; needs no config.
    Validate,
}

const EXIT_PARTIAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn run(cli: &Cli) -> Result<Summary, Box<dyn std::error::Error>> {
    if cli.verb == Verb::Validate {
        let (table, failed) = validate::run(cli.seed.unwrap_or(0));
        if let Some(out) = &cli.out {
            table.write(out, "validate", "")?;
        }
        return Ok(Summary { points: table.rows.len(), failures: failed });
    }
    let path = cli.config.as_ref().ok_or_else(|| ConfigError("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let hash = cfg.hash();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build()?;
    let ctx = Context { cache: Cache::new(&out, &hash, !cli.no_cache), cfg, out, pool, hash };
    match cli.verb {
        Verb::Steady => commands::steady(&ctx),
        Verb::Sweep => commands::sweep(&ctx),
        Verb::Markov => commands::markov(&ctx),
        Verb::Tune => commands::tune(&ctx),
        Verb::Validate => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    eprintln!("wall time {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(s) if s.failures == 0 => ExitCode::SUCCESS,
        Ok(s) => {
            eprintln!("{} of {} points failed", s.failures, s.points);
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}
