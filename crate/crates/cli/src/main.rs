mod config;
mod failure;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Mode;
use failure::Failure;

/// Scattering runs for unions of convex obstacles, driven by JSON configs.
#[derive(Parser)]
#[command(name = "hfscatter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geometrical-optics field with per-path breakdown.
    Goa(RunArgs),
    /// Iterated Kirchhoff increments and totals.
    Kirchhoff(RunArgs),
    /// Residuals of the stationary-path identities, with pass/fail.
    Validate(RunArgs),
    /// Kirchhoff vs geometrical optics error per wavenumber and convergence report.
    Compare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (affects speed only).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(mode: Mode, args: &RunArgs) -> Result<Vec<String>, (Failure, Option<PathBuf>)> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err((Failure::config("ConfigError", "--threads must be at least 1"), args.output.clone()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| (Failure::Io(e.to_string()), args.output.clone()))?;
    }
    let prep = config::load(&args.config, mode, args.output.as_deref()).map_err(|f| (f, args.output.clone()))?;
    let dir = Some(prep.output.clone());
    let outcome = run::run(&prep).map_err(|f| (f, dir.clone()))?;
    match outcome.failure {
        Some(f) => Err((f, dir)),
        None => Ok(outcome.files),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (mode, args) = match &cli.command {
        Command::Goa(a) => (Mode::Goa, a),
        Command::Kirchhoff(a) => (Mode::Kirchhoff, a),
        Command::Validate(a) => (Mode::Validate, a),
        Command::Compare(a) => (Mode::Compare, a),
    };
    match execute(mode, args) {
        Ok(files) => {
            for f in files {
                println!("wrote {f}");
            }
            ExitCode::SUCCESS
        }
        Err((failure, dir)) => {
            if let Some(dir) = dir {
                failure.write_record(&dir);
            }
            eprint!("{}", failure.record());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
