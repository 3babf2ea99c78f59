mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "echorec", version, about = "Echo-based scene reconstruction toolkit")]
struct Cli {
    /// Run configuration (TOML) with per-module sections; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for every random choice. Defaults to the config file's, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a configuration key, e.g. `--set train.epochs=30`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Report failures as a one-line JSON record on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a sweep configuration.
    Simulate(commands::simulate::Args),
    /// Train a classifier on a generated dataset.
    Train(commands::learn::TrainArgs),
    /// Evaluate a checkpoint or a baseline and write reports.
    Eval(commands::learn::EvalArgs),
    /// Classify every 1 s frame of a recording.
    Infer(commands::learn::InferArgs),
    /// Fill reflective holes in a mesh from echo classifications.
    Enhance(commands::enhance::Args),
    /// Synthesize the input that maximally excites one class.
    Actmax(commands::learn::ActmaxArgs),
    /// Sabine reverberation time of a scene.
    Rt60(commands::rt60::Args),
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("ECHOREC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| exit::usage(format!("ECHOREC_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(exit::usage("ECHOREC_THREADS must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    let run = RunConfig::load(cli.config.as_deref(), &cli.overrides, cli.seed).map_err(exit::usage_from)?;
    match cli.command {
        Command::Simulate(a) => commands::simulate::run(&run, a),
        Command::Train(a) => commands::learn::train(&run, a),
        Command::Eval(a) => commands::learn::eval(&run, a),
        Command::Infer(a) => commands::learn::infer(&run, a),
        Command::Enhance(a) => commands::enhance::run(&run, a),
        Command::Actmax(a) => commands::learn::actmax(&run, a),
        Command::Rt60(a) => commands::rt60::run(&run, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json_errors;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit::code(&e);
            if json {
                let record = serde_json::json!({
                    "error": format!("{e:#}"),
                    "kind": exit::kind(code),
                    "exit_code": code,
                });
                eprintln!("{record}");
            } else {
                eprintln!("echorec: {e:#}");
            }
            ExitCode::from(code)
        }
    }
}
