use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod output;

#[derive(Debug, Parser)]
#[command(name = "shockrec", version, about = "Fund-flow driven shock/recovery simulator and EMD time-scale analyzer")]
struct Cli {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Single seed, overriding any seeds in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "shockrec-out")]
    out: PathBuf,
    /// Worker threads for sweeps and ensembles (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Named scenario, e.g. synthetic-quality or pharma.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate and normalize a flow file and/or compute φ from statements.
    Ingest(IngestArgs),
    /// Run one scenario, or an ensemble when several seeds are given.
    Simulate(SimulateArgs),
    /// Run a scenario over a grid of shock lengths or φ values.
    Sweep(SweepArgs),
    /// Decompose a series and read shock/recovery time scales off its dominant mode.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// `date,fii_buy,fii_sell,dii_buy,dii_sell` records.
    #[arg(long)]
    flow: Option<PathBuf>,
    /// Per-company balance-sheet statements.
    #[arg(long)]
    statements: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Flow file replacing synthetic flow or the config's flow file.
    #[arg(long)]
    flow: Option<PathBuf>,
    /// Seed list such as `1-1000` or `1,5,9`.
    #[arg(long)]
    seeds: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Axis {
    ShockLength,
    Phi,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Axis,
    /// Comma-separated grid values.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Seed list such as `1-1000` or `1,5,9`.
    #[arg(long)]
    seeds: Option<String>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// CSV series with a header row.
    series: PathBuf,
    /// Column to analyze.
    #[arg(long, default_value = "price")]
    column: String,
    /// Row index where the shock begins; read from a `phase` column when absent.
    #[arg(long)]
    shock_start: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let global = commands::Global {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        jobs: cli.jobs,
        preset: cli.preset,
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(&global, a.flow.as_deref(), a.statements.as_deref()),
        Command::Simulate(a) => commands::simulate(&global, a.flow, a.seeds.as_deref()),
        Command::Sweep(a) => {
            let axis = match a.axis {
                Axis::ShockLength => shockrec_core::SweepAxis::ShockLength,
                Axis::Phi => shockrec_core::SweepAxis::Phi,
            };
            commands::sweep(&global, axis, &a.grid, a.seeds.as_deref())
        }
        Command::Analyze(a) => commands::analyze(&global, &a.series, &a.column, a.shock_start),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
