//! `hybridsr trial|experiment|selftest`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybridsr::config::parse_methods;
use hybridsr::run::{cmd_experiment, cmd_selftest, cmd_trial, RunManifest, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "hybridsr", version, about = "Sparse sound-field maps from hybrid SMA/LMA recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overridden by HYBRIDSR_OUT).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Replaces the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Comma-separated subset of sma,joint,rr.
    #[arg(long, global = true)]
    methods: Option<String>,

    /// Worker threads (default: HYBRIDSR_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write a per-iteration IRLS trace CSV.
    #[arg(long, global = true)]
    debug_trace: bool,

    /// Print per-trial lines.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one seeded trial and export maps.
    Trial,
    /// Run the configured grid of scenes and trials.
    Experiment,
    /// Run the fast invariant suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let methods = match cli.methods.as_deref().map(parse_methods).transpose() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let manifest = RunManifest {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        methods,
        threads: cli.threads,
        debug_trace: cli.debug_trace,
        verbose: cli.verbose,
    }
    .with_env();
    let code = match cli.command {
        Command::Trial => cmd_trial(&manifest),
        Command::Experiment => cmd_experiment(&manifest),
        Command::Selftest => cmd_selftest(),
    };
    ExitCode::from(code as u8)
}
