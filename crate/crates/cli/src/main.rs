//! `enlab <command> --config <path> [--seed N] [--out DIR] [--format csv|json]`
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 validation error,
//! 3 capacity exceeded, 4 invariant breach detected in the data.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use crate::commands::Ctx;
use crate::config::KvConfig;
use crate::error::CliResult;
use crate::output::{emit, Format, RunInfo};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Exhaustive activation census and entropies of McCulloch-Pitts neurons.
    McpCensus,
    /// Entropy over a grid of weight vectors, maxima flagged.
    EntropySweep,
    /// Hopfield recall traces.
    Hopfield,
    /// Metropolis sampling of a ferromagnet.
    Ising,
    /// Composite reduction energy ledger of a dataset.
    Reduce,
    /// Train a concept store from a labeled dataset.
    ConceptTrain,
    /// Interpret a dataset against a concept store.
    ConceptInfer,
    /// Edit distance between stored concepts.
    ConceptDiversity,
    /// Generate the synthetic stroke dataset.
    GenDataset,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }

    fn handler(self) -> commands::Command {
        match self {
            Command::McpCensus => commands::mcp_census,
            Command::EntropySweep => commands::entropy_sweep,
            Command::Hopfield => commands::hopfield,
            Command::Ising => commands::ising,
            Command::Reduce => commands::reduce,
            Command::ConceptTrain => commands::concept_train,
            Command::ConceptInfer => commands::concept_infer,
            Command::ConceptDiversity => commands::concept_diversity,
            Command::GenDataset => commands::gen_dataset,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "enlab", version, about = "Seeded energy-landscape experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `seed` (default 0).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let config = KvConfig::load(&cli.config)?;
    let seed = match cli.seed {
        Some(s) => s,
        None => config.or("seed", 0u64)?,
    };
    let ctx = Ctx { config, seed };
    let report = (cli.command.handler())(&ctx)?;
    let name = cli.command.name();
    let info = RunInfo {
        command: &name,
        seed,
        format: cli.format,
        config: ctx.config.entries(),
    };
    emit(&cli.out, &info, &report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("enlab {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
