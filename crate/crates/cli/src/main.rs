//! `skmt`: retrieval-augmented translation experiments from the command line.

mod cmd;
mod config;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "skmt",
    version,
    about = "Translation with per-sentence kNN datastores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the BM25 index over a corpus's source side.
    Index(cmd::index::IndexArgs),
    /// Translate a file of source sentences.
    Translate(cmd::translate::TranslateArgs),
    /// Evaluate every (k, m, tau) cell on a dev set.
    Grid(cmd::grid::GridArgs),
    /// Time base and retrieval-augmented decoding.
    Bench(cmd::bench::BenchArgs),
    /// BLEU, ChrF and optional word accuracy by frequency.
    Eval(cmd::eval::EvalArgs),
    /// Simulate online feedback over documents.
    Online(cmd::online::OnlineArgs),
    /// Histogram of test-to-corpus similarity.
    AnalyzeSim(cmd::analyze_sim::AnalyzeSimArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<io::Invalid>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<skmt_core::Error>() {
            use skmt_core::Error::*;
            return match e {
                InvalidConfig { .. } | LengthMismatch { .. } | DimensionMismatch { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Index(a) => cmd::index::run(a),
        Command::Translate(a) => cmd::translate::run(a),
        Command::Grid(a) => cmd::grid::run(a),
        Command::Bench(a) => cmd::bench::run(a),
        Command::Eval(a) => cmd::eval::run(a),
        Command::Online(a) => cmd::online::run(a),
        Command::AnalyzeSim(a) => cmd::analyze_sim::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
