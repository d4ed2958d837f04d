//! `prnn`: train, reduce, predict with and analyze predictive neural networks.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O or parse error, 4 numerical failure.

mod commands;
mod error;
mod model_file;
mod series;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AnalyzeArgs, BenchArgs, PredictArgs, ReduceArgs, TrainArgs};

#[derive(Debug, Parser)]
#[command(name = "prnn", version, about = "Predictive neural networks: learning, Jordan-form reduction and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn a network from a time series and save it.
    Train(TrainArgs),
    /// Shrink a trained network via its real Jordan form.
    Reduce(ReduceArgs),
    /// Emit the network's output trajectory as CSV.
    Predict(PredictArgs),
    /// Classify the long-term behaviour of a network.
    Analyze(AnalyzeArgs),
    /// Run a seeded benchmark preset.
    Bench(BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let result = match &cli.command {
        Command::Train(a) => commands::train(a, &mut out),
        Command::Reduce(a) => commands::reduce(a, &mut out),
        Command::Predict(a) => commands::predict(a, &mut out),
        Command::Analyze(a) => commands::analyze(a, &mut out, &mut err),
        Command::Bench(a) => commands::bench(a, &mut out, &mut err),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
