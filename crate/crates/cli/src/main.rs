use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unmeasure_cli::commands::run_file;
use unmeasure_cli::{Command, Overrides};

#[derive(Parser)]
#[command(
    name = "unmeasure",
    version,
    about = "Measurement-reversal experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the seed in the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Overrides the output directory in the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Use Born probabilities instead of sampled shots.
    #[arg(long, global = true)]
    exact: bool,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Fidelity table over the (recool, readout) sweep.
    RunTable,
    /// Photon-count histogram of the readout.
    Histogram,
    /// Density matrices at every sweep point.
    DumpStates,
    /// Outcome statistics for the four test inputs.
    InfoTest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config) = cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    let command = match cli.verb {
        Verb::RunTable => Command::RunTable,
        Verb::Histogram => Command::Histogram,
        Verb::DumpStates => Command::DumpStates,
        Verb::InfoTest => Command::InfoTest,
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
        exact: cli.exact,
        threads: cli.threads.map(|n| n as usize),
    };
    match run_file(command, &config, &overrides) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
