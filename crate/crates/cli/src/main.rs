use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use poisson_moments::Rat;

mod commands;
mod output;

use commands::parse_positive_rat;
use output::{Format, OutputRecord};

const SEED_ENV: &str = "POISSON_MOMENTS_SEED";

/// Exact and simulated moments of distances between Poisson arrival times.
#[derive(Parser, Debug)]
#[command(name = "poisson-moments", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for Monte Carlo work (defaults to all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact E|X_{k+r} - Y_k|^a.
    Moment(MomentArgs),
    /// Exact sum over k = 1..n of E|X_k - Y_k|^a.
    Sum(SumArgs),
    /// Run the exact identity suites.
    Verify(VerifyArgs),
    /// Monte Carlo estimate of E|X_{k+r} - Y_k|^b for real b > 0.
    Simulate(SimulateArgs),
    /// Sorted-matching scaling experiment.
    Matching(MatchingArgs),
}

#[derive(Args, Debug)]
pub struct MomentArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub r: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub a: u64,
    /// Positive rational rate, e.g. `2`, `1/3` or `0.25`.
    #[arg(long, default_value = "1", value_parser = parse_positive_rat)]
    pub lambda: Rat,
    /// Evaluate every applicable closed form and the first-principles oracle.
    #[arg(long)]
    pub cross_check: bool,
}

#[derive(Args, Debug)]
pub struct SumArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub a: u64,
    #[arg(long, default_value = "1", value_parser = parse_positive_rat)]
    pub lambda: Rat,
    /// Compare against the term-by-term sum.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `all` or one of: legendre, telescoping, binomial, dpoly, gould,
    /// geometric, gamma-incomplete.
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    pub suite: String,
    #[arg(long)]
    pub max_a: Option<u64>,
    #[arg(long)]
    pub max_k: Option<u64>,
    #[arg(long)]
    pub max_n: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, default_value_t = 0)]
    pub r: u64,
    /// Real exponent b > 0.
    #[arg(long, value_parser = positive_f64)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct MatchingArgs {
    /// Cost exponent b > 0.
    #[arg(long, value_parser = positive_f64)]
    pub b: f64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_min: u64,
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_max: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    pub grid_factor: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..))]
    pub trials: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 1)]
    pub seed: u64,
    /// Fixed arrival rate. By default the rate equals the point count n.
    #[arg(long, value_parser = positive_f64)]
    pub rate: Option<f64>,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(format!("expected a positive finite number, got `{s}`")),
    }
}

fn parse_suite(s: &str) -> Result<String, String> {
    if s == "all" || s.parse::<poisson_moments::Suite>().is_ok() {
        Ok(s.to_string())
    } else {
        Err(format!("unknown suite `{s}`"))
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    CrossCheck(String),
    /// A cross-check failed after the record was built; print it, then fail.
    CrossCheckWithOutput(Box<OutputRecord>, String),
}

fn emit(rec: &mut OutputRecord, format: Format, start: Instant) -> io::Result<()> {
    rec.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut out = io::stdout().lock();
    rec.write(format, &mut out)?;
    out.flush()
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let start = Instant::now();
    let (mut rec, code) = match &cli.command {
        Command::Moment(a) => (commands::cmd_moment(a)?, ExitCode::SUCCESS),
        Command::Sum(a) => (commands::cmd_sum(a)?, ExitCode::SUCCESS),
        Command::Verify(a) => {
            let (rec, ok) = commands::cmd_verify(a)?;
            (rec, if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Simulate(a) => (commands::cmd_simulate(a)?, ExitCode::SUCCESS),
        Command::Matching(a) => (commands::cmd_matching(a)?, ExitCode::SUCCESS),
    };
    emit(&mut rec, cli.format, start).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::CrossCheck(msg)) => {
            eprintln!("cross-check failed: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::CrossCheckWithOutput(mut rec, msg)) => {
            let _ = emit(&mut rec, cli.format, start);
            eprintln!("cross-check failed: {msg}");
            ExitCode::from(3)
        }
    }
}
