use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use splitbeam::harness::{exit_code, ExperimentConfig, Pipeline, Stage};
use splitbeam::{Error, Result};

/// Split beamforming feedback experiments.
#[derive(Parser)]
#[command(name = "splitbeam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; all cores when unset.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generate, normalize and split the CSI dataset.
    Gen,
    /// Train one split model per compression level.
    Train,
    /// Measure BER of the ideal, 802.11 and split feedback on the test split.
    Eval,
    /// Search for the smallest feasible bottleneck.
    Bop,
    /// Write the FLOP and airtime table.
    Account,
    /// Collate BER, cost and search results.
    Report,
    /// Every stage in order.
    Run,
}

fn stage(c: Command) -> Option<Stage> {
    match c {
        Command::Gen => Some(Stage::Gen),
        Command::Train => Some(Stage::Train),
        Command::Eval => Some(Stage::Eval),
        Command::Bop => Some(Stage::Bop),
        Command::Account => Some(Stage::Account),
        Command::Report => Some(Stage::Report),
        Command::Run => None,
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    }
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    let out = cli.out.clone().unwrap_or_else(|| config.output_dir());
    let pipeline = Pipeline::new(config, out)?;

    let stages = match stage(cli.command) {
        Some(s) => vec![s],
        None => Stage::ALL
            .into_iter()
            .filter(|&s| s != Stage::Bop || pipeline.config.bop.is_some())
            .collect(),
    };
    for s in stages {
        for entry in pipeline.run(s)? {
            println!("{:<8} {}", s.name(), pipeline.out.join(&entry.path).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("splitbeam: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
