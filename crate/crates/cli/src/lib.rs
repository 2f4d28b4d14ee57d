//! Command-line front end for `arbor-core`: argument and config-file
//! handling, deterministic JSON/CSV reports, exit statuses.

pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;
use std::time::Instant;

use thiserror::Error;

pub use commands::execute;
pub use config::{parse_args, parse_config_file, Command, Format, RunConfig};
pub use report::{render, Check, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Clap(e) if !e.use_stderr() => EXIT_OK,
            CliError::Clap(_) => EXIT_USAGE,
            _ => EXIT_FAILED,
        }
    }
}

/// Runs a config and returns the report bytes and whether every check passed.
pub fn run(cfg: &RunConfig) -> Result<(Vec<u8>, Outcome), CliError> {
    let start = Instant::now();
    let outcome = execute(cfg);
    let elapsed = start.elapsed().as_millis() as u64;
    let bytes = render(cfg, &outcome, cfg.timing.then_some(elapsed))?;
    if !cfg.timing {
        eprintln!("arbor: finished in {elapsed} ms");
    }
    Ok((bytes, outcome))
}

/// Full entry point: parse, run, write, report failures. Returns the exit
/// status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(cfg) => cfg,
        Err(CliError::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
        Err(e) => {
            eprintln!("arbor: usage error: {e}");
            return e.exit_code();
        }
    };
    let (bytes, outcome) = match run(&cfg) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("arbor: {e}");
            return e.exit_code();
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("arbor: cannot write report: {e}");
        return EXIT_FAILED;
    }
    for c in outcome.failures() {
        eprintln!(
            "arbor: check failed: {}{}",
            c.name,
            c.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    for e in &outcome.errors {
        eprintln!("arbor: error: {e}");
    }
    if outcome.passed() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
