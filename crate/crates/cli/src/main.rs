mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "adastab", version, about = "Instrumented AdaGrad-Norm and RMSProp batches with pathwise checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a batch and write record files plus summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a fresh batch from a config, or re-check a persisted record file.
    Verify {
        #[arg(long, conflicts_with = "records", required_unless_present = "records")]
        config: Option<PathBuf>,
        /// Record file inside a batch directory.
        #[arg(long)]
        records: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one batch per point of a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `name=v1,v2,...`; repeat for more axes.
        #[arg(long = "grid", value_name = "NAME=VALUES")]
        grid: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print a digest of a batch directory.
    Report {
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `all` or a comma-separated list of check names.
    #[arg(long)]
    pub checks: Option<String>,
    /// Worker threads; defaults to ADASTAB_THREADS, then to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run { config, overrides } => commands::run(&config, &overrides),
        Command::Verify {
            config,
            records,
            overrides,
        } => match (config, records) {
            (Some(c), _) => commands::verify_config(&c, &overrides),
            (None, Some(r)) => commands::verify_records(&r),
            (None, None) => unreachable!("clap requires one target"),
        },
        Command::Sweep {
            config,
            grid,
            overrides,
        } => commands::sweep(&config, &grid, &overrides),
        Command::Report { dir } => commands::report(&dir),
    };
    match result {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
