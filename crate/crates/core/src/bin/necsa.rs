use std::io::{stdout, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use necsa::harness::{
    ablate, ablation_csv_path, compare, parse_config, report_density, run, AblationGrid, SeedStatus,
};

#[derive(Parser)]
#[command(
    version,
    about = "Episodic control with grid abstraction and reward shaping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every configured seed and write metrics and memory snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Run only this seed.
        #[arg(long)]
        seed_override: Option<u64>,
        #[arg(long, env = "NECSA_OUTDIR")]
        outdir: Option<PathBuf>,
    },
    /// Sweep a grid such as `m=1,2,3;measure_mode=score,qvalue`.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: String,
        #[arg(long, env = "NECSA_OUTDIR")]
        outdir: Option<PathBuf>,
    },
    /// Visit-count histogram of a memory snapshot.
    Density {
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Summary table of finished run directories.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seed_override,
            outdir,
        } => {
            let mut config = parse_config(&config).with_context(|| config.display().to_string())?;
            if let Some(seed) = seed_override {
                config.seeds = vec![seed];
            }
            if let Some(dir) = outdir {
                config.outdir = dir;
            }
            let mut failed = false;
            for outcome in run(&config)? {
                match &outcome.status {
                    SeedStatus::Completed => eprintln!(
                        "seed {}: {}",
                        outcome.seed,
                        outcome.metrics_path().display()
                    ),
                    SeedStatus::Diverged { step, message } => {
                        failed = true;
                        eprintln!("seed {}: diverged at step {step}: {message}", outcome.seed);
                    }
                }
            }
            Ok(if failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Ablate {
            config,
            grid,
            outdir,
        } => {
            let mut config = parse_config(&config).with_context(|| config.display().to_string())?;
            if let Some(dir) = outdir {
                config.outdir = dir;
            }
            let grid = AblationGrid::parse(&grid)?;
            ablate(&config, &grid)?;
            let path = ablation_csv_path(&config);
            let text =
                std::fs::read_to_string(&path).with_context(|| path.display().to_string())?;
            stdout().write_all(text.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Density { snapshot } => {
            let report =
                report_density(&snapshot).with_context(|| snapshot.display().to_string())?;
            report.write_csv(stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { runs } => {
            compare(&runs, stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
