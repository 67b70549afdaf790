//! Seeded experiment CLI: `sample`, `tune`, `bench`, `diagnose`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hams::experiment::{self, BenchResult};

#[derive(Parser)]
#[command(name = "hams", version, about = "Irreversible MCMC sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel repetitions (0 = rayon default).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured sampler: burn-in, collection, draws + diagnostics.
    Sample(RunArgs),
    /// Burn-in step-size adaptation only; prints the frozen step size.
    Tune(RunArgs),
    /// Multi-method comparison over repeated chains.
    Bench(RunArgs),
    /// ESS/ACF report from an existing draws file.
    Diagnose {
        /// A draws CSV produced by `sample` or `bench`.
        #[arg(long)]
        draws: PathBuf,
        /// Bartlett-window cutoff.
        #[arg(long, default_value_t = 3000)]
        cutoff: usize,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(args: &RunArgs) -> hams::Result<experiment::ExperimentConfig> {
    let mut cfg = experiment::load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .map_err(|e| hams::Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(cfg)
}

fn print_summary(result: &BenchResult) {
    println!("method,time_s,ess_min,ess_median,ess_max,min_ess_per_time,acceptance_rate");
    for row in &result.summary {
        println!(
            "{},{:.3},{:.1},{:.1},{:.1},{:.3},{:.4}",
            row.method,
            row.time_s,
            row.ess_min,
            row.ess_median,
            row.ess_max,
            row.min_ess_per_time,
            row.acceptance_rate
        );
    }
    println!("outputs: {}", result.out_dir.display());
}

fn run() -> hams::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Sample(args) => {
            let cfg = load(&args)?;
            print_summary(&experiment::run_sample(&cfg, &args.out)?);
        }
        Command::Tune(args) => {
            let cfg = load(&args)?;
            let (epsilon, rate) = experiment::run_tune(&cfg, &args.out)?;
            println!("frozen epsilon = {epsilon}");
            println!("last-window acceptance rate = {rate}");
        }
        Command::Bench(args) => {
            let cfg = load(&args)?;
            print_summary(&experiment::run_bench(&cfg, &args.out)?);
        }
        Command::Diagnose { draws, cutoff, out: _ } => {
            let report = experiment::run_diagnose(&draws, cutoff)?;
            println!(
                "config_hash = {}, seed = {}, version = {}",
                report.header.config_hash, report.header.seed, report.header.version
            );
            println!("draws = {}, cutoff K = {}", report.ess.n, report.ess.k_used);
            println!("acceptance rate = {:.4}", report.acceptance_rate);
            println!(
                "ESS (min, median, max) = ({:.1}, {:.1}, {:.1})",
                report.ess.min, report.ess.median, report.ess.max
            );
            if report.ess.time_seconds > 0.0 {
                println!(
                    "wall time = {:.3} s, min ESS / s = {:.3}",
                    report.ess.time_seconds, report.ess.min_ess_per_second
                );
            }
            if !report.ess.flagged.is_empty() {
                println!("flagged degenerate coordinates: {:?}", report.ess.flagged);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
