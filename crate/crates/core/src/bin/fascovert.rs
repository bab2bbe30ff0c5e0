use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fascovert::ao::Scheme;
use fascovert::config::ScenarioConfig;
use fascovert::harness::{emit_plot, run_experiment, write_csv, ExperimentSpec, SweepAxis};
use fascovert::{Error, Result};

#[derive(Parser)]
#[command(name = "fascovert", version, about = "Monte-Carlo sweeps for fluid-antenna secure and covert transmission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write per-trial results plus aggregates as CSV.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file (flat JSON).
    #[arg(long)]
    config: PathBuf,
    /// Swept parameter: pmax (dBm) or epsilon.
    #[arg(long)]
    sweep: String,
    /// Comma-separated, strictly increasing sweep values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Vec<f64>,
    /// Comma-separated subset of proposed, fpa, rpa, eas.
    #[arg(long, value_delimiter = ',', default_value = "proposed,fpa,rpa,eas")]
    schemes: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "FASCOVERT_JOBS", default_value_t = 0)]
    jobs: usize,
}

fn run(args: RunArgs) -> Result<()> {
    let base = ScenarioConfig::from_json_file(&args.config)?;
    let axis: SweepAxis = args.sweep.parse()?;
    let schemes = args
        .schemes
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect::<Result<Vec<_>>>()?;
    let mut spec = ExperimentSpec::new(base, axis, args.values, schemes, args.trials, args.seed);
    spec.jobs = args.jobs;
    let table = run_experiment(&spec)?;
    write_csv(&table, &args.out)?;
    if let Some(path) = &args.plot {
        emit_plot(&table, path)?;
    }
    let failed: usize = table.aggregates.iter().map(|a| a.trials_failed).sum();
    for a in &table.aggregates {
        eprintln!(
            "{:>8} {}={:<8} mean={:.4} std={:.4} ok={}",
            a.scheme.name(),
            axis.column(),
            a.sweep_value,
            a.mean,
            a.std,
            a.trials_ok
        );
    }
    if failed > 0 {
        eprintln!("warning: {failed} trial(s) failed; see the status column");
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_code(&e))
            }
        },
    }
}
