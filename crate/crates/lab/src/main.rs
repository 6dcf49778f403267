use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use haarmul_lab::{run, Command, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(name = "haarmul", version, about = "Dyadic Haar multiplier and A2 weight experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Dimension.
    #[arg(long = "d", global = true)]
    dim: Option<u32>,
    /// Depth.
    #[arg(long = "L", global = true)]
    depth: Option<u32>,
    /// Relative tolerance of norm computations.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Exact-identity suite.
    Verify,
    /// Inequality audits over a weight corpus.
    Audit,
    /// Ten-norm readout for one weight.
    Norms,
    /// Ten norms across a corpus with slope fits.
    Sweep,
    /// Write a weight corpus to disk.
    Generate,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let command = match cli.command {
        Cmd::Verify => Command::Verify,
        Cmd::Audit => Command::Audit,
        Cmd::Norms => Command::Norms,
        Cmd::Sweep => Command::Sweep,
        Cmd::Generate => Command::Generate,
    };
    let mut config = ExperimentConfig::defaults(command);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.clone(), source })?;
        config.apply_text(&text)?;
    }
    if let Some(v) = &cli.out {
        config.out = v.clone();
    }
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.dim {
        config.dim = v;
    }
    if let Some(v) = cli.depth {
        config.depth = v;
    }
    if let Some(v) = cli.tol {
        config.tol = v;
    }
    if let Some(r) = config.weight.as_mut() {
        r.dim = config.dim;
        r.depth = config.depth;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|c| run(&c));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("assertion failure");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
