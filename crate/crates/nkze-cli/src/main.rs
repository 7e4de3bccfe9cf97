//! `nkze` — run and verify multi-agent landscape-search experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error,
//! 4 verification failure.

mod config;
mod output;
mod presets;

use clap::{Args, Parser, Subcommand};
use nkze::engine;
use nkze::landscape::{Landscape, LandscapeConfig};
use nkze::oracle;
use output::CellResult;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nkze",
    version,
    about = "Multi-agent search on endogenously-changing fitness landscapes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write raw.csv / aggregate.csv.
    Run(RunArgs),
    /// Run the brute-force verification suite.
    Verify(VerifyArgs),
    /// Dump a landscape's interaction map as CSV.
    DumpMap(DumpMapArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (flat key = value with [cell <id>] sections).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Canned grid: fig1, fig2, fig3, fig4, or fig5.
    #[arg(long)]
    preset: Option<String>,
    /// Model override: standard, stealthl, or structc.
    #[arg(long)]
    model: Option<String>,
    /// Replications per cell.
    #[arg(long)]
    runs: Option<usize>,
    /// Iterations per replication.
    #[arg(long)]
    iterations: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory for raw.csv and aggregate.csv.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Extra key=value overrides applied to every cell.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the verification probes.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct DumpMapArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 12)]
    z: usize,
    #[arg(long, default_value_t = 0)]
    e: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Config(String),
    Io(String),
}

/// Writing to a closed pipe (e.g. `nkze ... | head`) is not an error.
fn ignore_epipe(result: std::io::Result<()>) -> std::io::Result<()> {
    match result {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Config(msg) => {
                eprintln!("configuration error: {msg}");
                ExitCode::from(2)
            }
            CliError::Io(msg) => {
                eprintln!("i/o error: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => match cmd_run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => e.report(),
        },
        Command::Verify(args) => cmd_verify(args),
        Command::DumpMap(args) => match cmd_dump_map(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => e.report(),
        },
    }
}

fn parse_overrides(args: &RunArgs) -> Result<Vec<(String, String)>, CliError> {
    let mut overrides = Vec::new();
    if let Some(model) = &args.model {
        overrides.push(("model".to_string(), model.clone()));
    }
    if let Some(runs) = args.runs {
        overrides.push(("runs".to_string(), runs.to_string()));
    }
    if let Some(iterations) = args.iterations {
        overrides.push(("iterations".to_string(), iterations.to_string()));
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".to_string(), seed.to_string()));
    }
    for raw in &args.overrides {
        let (key, value) = raw.split_once('=').ok_or_else(|| {
            CliError::Config(format!("override '{raw}' is not of the form key=value"))
        })?;
        overrides.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(overrides)
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }

    let file_text = match &args.config {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let preset_cells = match &args.preset {
        Some(name) => Some(
            presets::by_name(name)
                .ok_or_else(|| CliError::Config(format!("unknown preset '{name}'")))?,
        ),
        None => None,
    };
    let overrides = parse_overrides(&args)?;
    let spec = config::resolve(file_text.as_deref(), preset_cells, &overrides)
        .map_err(CliError::Config)?;

    let mut results = Vec::new();
    for outcome in engine::run_experiment(spec.cells) {
        let output =
            outcome.map_err(|(id, e)| CliError::Config(format!("cell '{id}': {e}")))?;
        results.push(output);
    }

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", args.out.display())))?;
    let raw_path = args.out.join("raw.csv");
    let agg_path = args.out.join("aggregate.csv");
    let io_err = |path: &PathBuf, e: std::io::Error| {
        CliError::Io(format!("writing {}: {e}", path.display()))
    };
    let raw_file = fs::File::create(&raw_path).map_err(|e| io_err(&raw_path, e))?;
    output::write_raw_csv(std::io::BufWriter::new(raw_file), &results)
        .map_err(|e| io_err(&raw_path, e))?;
    let agg_file = fs::File::create(&agg_path).map_err(|e| io_err(&agg_path, e))?;
    output::write_aggregate_csv(std::io::BufWriter::new(agg_file), &results)
        .map_err(|e| io_err(&agg_path, e))?;

    ignore_epipe(output::print_summary(std::io::stdout().lock(), &results))
        .map_err(|e| CliError::Io(e.to_string()))?;
    println!("\nwrote {} and {}", raw_path.display(), agg_path.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let checks = oracle::run_suite(args.seed);
    let mut all_passed = true;
    for check in &checks {
        if check.passed {
            println!("ok   {}", check.name);
        } else {
            all_passed = false;
            println!("FAIL {}: {}", check.name, check.detail);
        }
    }
    if all_passed {
        println!(
            "verification passed ({} checks, seed {})",
            checks.len(),
            args.seed
        );
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed (seed {})", args.seed);
        ExitCode::from(4)
    }
}

fn cmd_dump_map(args: DumpMapArgs) -> Result<(), CliError> {
    let cfg = LandscapeConfig {
        n: args.n,
        k: args.k,
        z: args.z,
        e: args.e,
        seed: args.seed,
    };
    let landscape = Landscape::generate(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
            landscape
                .dump_interaction_map(std::io::BufWriter::new(file))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        None => {
            ignore_epipe(landscape.dump_interaction_map(std::io::stdout().lock()))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}
