//! `pdc`: complete, evaluate, ablate, and synthesize depth frames.

mod ablate;
mod complete;
mod eval;
mod files;
mod manifest;
mod opts;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::opts::CommonOpts;

#[derive(Debug, Parser)]
#[command(name = "pdc", version, about = "Piecewise depth completion for sparse LiDAR")]
struct Cli {
    #[command(flatten)]
    common: CommonOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complete one frame, or every frame of a directory.
    Complete(complete::Args),
    /// Compare predictions against ground truth.
    Eval(eval::Args),
    /// Run the blur x extrapolation x superpixel-set sweep.
    Ablate(ablate::Args),
    /// Render synthetic scenes into rgb/sparse/gt PNG triples.
    Synth(synth::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = cli.common.thread_pool().and_then(|pool| {
        pool.install(|| match &cli.command {
            Command::Complete(a) => complete::run(&cli.common, a),
            Command::Eval(a) => eval::run(a),
            Command::Ablate(a) => ablate::run(&cli.common, a),
            Command::Synth(a) => synth::run(a),
        })
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
