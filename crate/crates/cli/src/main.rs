use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use meissner_lab::config::{AcceptanceConfig, Experiment, RunConfig};
use meissner_lab::plot::{emit_plot, PlotSpec};
use meissner_lab::run::{execute, resolve_out_dir, write_artifacts};
use meissner_lab::table::ResultsTable;
use meissner_lab::CliError;

#[derive(Parser)]
#[command(name = "meissner-lab", version, about = "Meissner-state experiments, tables and plots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `out`, then $MEISSNER_LAB_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweeps.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the acceptance suite.
    Acceptance {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render a CSV table as SVG on stdout.
    Plot { table: PathBuf, spec: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::at(path.display().to_string(), format!("cannot read: {e}")))
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(config: RunConfig, out: Option<PathBuf>, jobs: Option<usize>) -> Result<(), CliError> {
    let dir = resolve_out_dir(out.as_deref(), &config);
    let artifacts = execute(&config, jobs.unwrap_or_else(default_jobs).max(1))?;
    write_artifacts(&dir, &artifacts)?;
    println!("{}", serde_json::to_string_pretty(&artifacts.summary).expect("summary serializes"));
    match artifacts.failure {
        Some(msg) => Err(CliError::Acceptance(msg)),
        None => Ok(()),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, seed, jobs } => {
            let mut cfg = RunConfig::from_json(&read(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            run(cfg, out, jobs)
        }
        Command::Acceptance { out, seed, jobs } => {
            let cfg = RunConfig { seed, ..RunConfig::new(Experiment::Acceptance(AcceptanceConfig {})) };
            run(cfg, out, jobs)
        }
        Command::Plot { table, spec } => {
            let table = ResultsTable::from_csv(&read(&table)?)?;
            let spec: PlotSpec = serde_json::from_str(&read(&spec)?).map_err(|e| CliError::at("plotspec", e.to_string()))?;
            print!("{}", emit_plot(&table, &spec)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.report()).expect("error report serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
