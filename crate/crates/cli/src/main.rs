//! `pshma`: solve, manufacture and verify from a TOML config.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::RunConfig;
use run::Outcome;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Solver(#[from] pshma_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 64,
            CliError::Solver(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "pshma", version, about = "Solve and certify the (n-1)-PSH Monge-Ampere equation on flat tori")]
struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for data-parallel kernels.
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

fn set_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(k) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

fn main() -> ExitCode {
    let args = Args::parse();
    set_threads(args.threads);
    let result = RunConfig::load(&args.config).and_then(|cfg| run::run(&cfg, args.quiet));
    match result {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => {
            eprintln!("pshma: hard checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("pshma: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
