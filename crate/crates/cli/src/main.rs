//! `ait`: generate operator specs, verify the axiom suite, classify growth, run sweeps.
//!
//! Exit codes: 0 success, 1 checks failed, 2 spec violation or invalid window/configuration,
//! 3 numerical non-convergence or internal inconsistency, 4 I/O.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Format, RunConfig, SweepConfig};
use error::CliError;
use output::{load_text, now_ms, OutDir, RunMeta};

#[derive(Debug, Parser)]
#[command(name = "ait", version, about = "Frobenius-analogue operators, intersection models and growth classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write an operator spec for one of the labelled families.
    Generate(CommonArgs),
    /// Run every axiom check on each window and write per-axiom reports.
    Verify(CommonArgs),
    /// Fit the growth law and report the verdict; any verdict exits 0.
    Classify(CommonArgs),
    /// Run the end-to-end report over a grid of families and q values.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[command(flatten)]
    run: RunConfig,
    /// JSON file with the same keys as the flags; its values take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep config: {"families": [...], "q": [...], "n_max": ..., "Y": ...}.
    #[arg(long)]
    config: PathBuf,
    /// Scenarios run concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

fn resolve(args: CommonArgs) -> Result<RunConfig, CliError> {
    let cfg = match &args.config {
        Some(path) => {
            let file: RunConfig = serde_json::from_str(&load_text(path)?)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            args.run.overlay(file)
        }
        None => args.run,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: Command, out: &mut Option<OutDir>) -> Result<(), CliError> {
    match command {
        Command::Generate(args) => {
            let cfg = resolve(args)?;
            if let Some(dir) = &cfg.out_dir {
                *out = Some(OutDir::create(dir.clone())?);
            }
            commands::generate(&cfg, out.as_mut())
        }
        Command::Verify(args) => {
            let cfg = resolve(args)?;
            commands::verify(&cfg, out.insert(OutDir::create(cfg.out_dir())?))
        }
        Command::Classify(args) => {
            let cfg = resolve(args)?;
            commands::classify(&cfg, out.insert(OutDir::create(cfg.out_dir())?))
        }
        Command::Sweep(args) => {
            let text = load_text(&args.config)?;
            let sweep: SweepConfig =
                serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", args.config.display())))?;
            let dir = args.out_dir.unwrap_or_else(|| PathBuf::from("ait-out"));
            commands::sweep(&sweep, args.jobs, args.format, out.insert(OutDir::create(dir)?))
        }
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Generate(_) => "generate",
        Command::Verify(_) => "verify",
        Command::Classify(_) => "classify",
        Command::Sweep(_) => "sweep",
    };
    let started = now_ms();
    let mut out = None;
    let result = execute(cli.command, &mut out);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ait {name}: error: {e}");
            e.exit_code()
        }
    };
    let mut code = code;
    if let Some(mut dir) = out {
        let meta = RunMeta {
            tool: "ait",
            version: env!("CARGO_PKG_VERSION"),
            command: name.to_string(),
            args,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            exit_code: code,
            artifacts: dir.artifacts().to_vec(),
        };
        if let Err(e) = dir.write_json("run_meta.json", &meta) {
            eprintln!("ait {name}: error: {e}");
            code = code.max(e.exit_code());
        }
    }
    std::process::exit(code);
}
