use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use negtype::config::Config;
use negtype::pipeline::{run, RunOptions, Stage};

#[derive(Parser)]
#[command(name = "negtype", version, about = "Build and verify proper negative definite length functions on groups of polynomial growth")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: config `out_dir`, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ball table cache directory.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Enumerate balls, fit growth, classify indices.
    Growth,
    /// Build ℓ_N and write its values.
    Construct,
    /// Run every verification check.
    Verify,
    /// Counting function, dimension estimate and heat trace.
    Spectral,
    /// Full pipeline with summary.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let cfg = match Config::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let stage = match cli.command {
        Command::Growth => Stage::Growth,
        Command::Construct => Stage::Construct,
        Command::Verify => Stage::Verify,
        Command::Spectral => Stage::Spectral,
        Command::Report => Stage::Report,
    };
    let opts = RunOptions {
        out_dir: cli
            .out
            .or_else(|| cfg.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
        cache_dir: cli.cache,
        threads: cli.threads,
        seed: cli.seed,
    };
    match run(&cfg, stage, &opts) {
        Ok(outcome) => {
            for (name, ok) in &outcome.verdicts {
                println!("{:<20} {}", name, if *ok { "pass" } else { "FAIL" });
            }
            println!("wrote {} files to {}", outcome.files.len(), opts.out_dir.display());
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
