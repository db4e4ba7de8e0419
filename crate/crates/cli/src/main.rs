use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kinetics_cli::{parse_config, run, CliError, Subcommand};

/// Granular collision kinetics: single impacts, collision operator
/// quadrature, DSMC, phase-space transport and the claim audit.
#[derive(Debug, Parser)]
#[command(name = "kinetics", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core. Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main_inner(args: Args) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Input {
        path: args.config.display().to_string(),
        source,
    })?;
    let mut config = parse_config(&text, Some(args.subcommand))?;
    if let Some(dir) = args.output_dir {
        config.output_dir = dir;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    run(&config, args.threads)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(args) {
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
