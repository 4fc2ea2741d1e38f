//! Command-line arguments.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ionjump_core::interaction::ScanKind;

use crate::commands::{self, AnalysisTask, Context, ScanMode};
use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ionjump", version, about = "Quantum jumps of a single ion driven by SPDC photons")]
pub struct Cli {
    /// Experiment configuration (INI sections); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads for scan points and trials.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// Config override `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Log progress to stderr (-vv for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor-chain jump-rate prediction.
    Predict,
    /// Jump rate versus crystal temperature or filter frequency.
    Scan {
        #[arg(long)]
        kind: ScanKind,
        #[arg(long, default_value = "analytic")]
        mode: ScanMode,
    },
    /// Simulate fluorescence count traces.
    Simulate {
        /// Trace length, s.
        #[arg(long)]
        duration: f64,
        /// Master seed (overrides rng.seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of trials, indices 0..K.
        #[arg(long, default_value_t = 1, conflicts_with = "trial")]
        trials: u64,
        /// Simulate only trial I.
        #[arg(long)]
        trial: Option<u64>,
    },
    /// Analyze traces or scans.
    Analyze {
        #[arg(long)]
        task: AnalysisTask,
        /// Trace or scan CSV files; jump and dwell tasks pool several traces.
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
    /// Print the resolved configuration and its digest.
    Config,
}

/// Executes the parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = cli.overrides.clone();
    if let Command::Simulate { seed: Some(s), .. } = &cli.command {
        overrides.push(format!("rng.seed={s}"));
    }
    let config = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;
    let ctx = Context::new(config, cli.out, cli.jobs);
    match cli.command {
        Command::Predict => {
            commands::predict(&ctx)?;
        }
        Command::Scan { kind, mode } => {
            let (_, path) = commands::scan(&ctx, kind, mode)?;
            println!("{}", path.display());
        }
        Command::Simulate {
            duration,
            trials,
            trial,
            ..
        } => {
            let indices: Vec<u64> = match trial {
                Some(i) => vec![i],
                None => (0..trials).collect(),
            };
            if indices.is_empty() {
                return Err(CliError::Usage("--trials must be at least 1".into()));
            }
            for p in commands::simulate(&ctx, duration, &indices)? {
                println!("{}", p.display());
            }
        }
        Command::Analyze { task, inputs } => {
            commands::analyze(&ctx, task, &inputs)?;
        }
        Command::Config => {
            print!("{}", ctx.config.to_ini());
        }
    }
    Ok(())
}
