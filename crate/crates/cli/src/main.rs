//! `cas-pfsp`: dataset generation, memetic solving, exact enumeration, MILP
//! export, schedule evaluation and benchmarking.

mod benchmark;
mod generate;
mod io;
mod solve;
mod tools;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Result;
use cas_pfsp::ObjectiveKind;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cas-pfsp", version, about = "Carbon-aware permutation flow-shop scheduling")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Parameter profile (m1t1, m1t3, m3t1, m3t3) or TOML file. Defaults to
    /// the profile matching each instance's shape.
    #[arg(long, global = true)]
    pub params: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Wall-clock limit per memetic run, in seconds.
    #[arg(long, global = true)]
    pub time_limit: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
}

impl Global {
    pub fn time_limit(&self) -> Result<Option<Duration>> {
        self.time_limit
            .map(|s| {
                Duration::try_from_secs_f64(s)
                    .map_err(|_| anyhow::anyhow!("--time-limit must be a non-negative number of seconds"))
            })
            .transpose()
    }
}

/// Overrides applied on top of the selected parameter profile.
#[derive(Args, Clone, Default)]
pub struct SearchArgs {
    /// Population size override.
    #[arg(long)]
    pub population: Option<usize>,
    /// Generation count override.
    #[arg(long)]
    pub generations: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset from historical energy data.
    Generate(generate::GenerateArgs),
    /// Run the memetic algorithm on instances.
    Solve(solve::SolveArgs),
    /// Enumerate a tiny instance exhaustively.
    Oracle(tools::OracleArgs),
    /// Write the MILP of an instance in LP format.
    ExportMilp(tools::ExportArgs),
    /// Evaluate a schedule file.
    Evaluate(tools::EvaluateArgs),
    /// Compare methods over datasets: run statistics, gaps and the cross table.
    Benchmark(benchmark::BenchmarkArgs),
}

pub fn parse_objectives(list: &[ObjectiveKind]) -> Vec<ObjectiveKind> {
    let mut out: Vec<ObjectiveKind> = Vec::new();
    for k in list {
        if !out.contains(k) {
            out.push(*k);
        }
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    if cli.global.jobs > 0 {
        cas_pfsp::par::set_worker_count(cli.global.jobs);
    }
    match cli.command {
        Command::Generate(args) => generate::run(&cli.global, args),
        Command::Solve(args) => solve::run(&cli.global, args),
        Command::Oracle(args) => tools::oracle(&cli.global, args),
        Command::ExportMilp(args) => tools::export(&cli.global, args),
        Command::Evaluate(args) => tools::evaluate(&cli.global, args),
        Command::Benchmark(args) => benchmark::run(&cli.global, args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
