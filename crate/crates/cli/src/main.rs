mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Numerics(#[from] qiope::Error),
}

/// `QIOPE_THREADS` caps the worker pool.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QIOPE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("QIOPE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let cfg = RunConfig::from_cli(cli)?;
    let out = commands::run(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(out.body.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?,
    }
    for note in &out.notes {
        eprintln!("{note}");
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
