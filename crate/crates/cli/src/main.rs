use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use vertexbound_cli::{execute_file, render, CliError, Command};

/// Exact computations for intertwining operators among modules of rational vertex algebras.
#[derive(Parser)]
#[command(name = "vertexbound", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured truncation depth.
    #[arg(long)]
    depth: Option<usize>,
    /// Worker threads; the report does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("thread pool: {e}");
        }
    }
    let outcome = execute_file(args.command, &args.config, args.depth).and_then(|r| emit(&args.out, &render(&r)));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let text = render(&e.object());
            if emit(&args.out, &text).is_err() {
                print!("{text}");
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
