//! `roboground`: dataset synthesis, simulation, scoring and the reward service.

mod client;
mod config;
mod pipeline;
mod score;
mod serve;
mod simulate;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use config::{GlobalArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "roboground", version, about = "Grounded robot-code dataset tooling")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate task instructions from the prompt profiles.
    SynthInstructions(pipeline::SynthArgs),
    /// Turn instructions into checked programs.
    Ground(pipeline::GroundArgs),
    /// Write the tasks awaiting human review.
    ReviewExport(pipeline::ReviewExportArgs),
    /// Apply a completed review file.
    ReviewImport(pipeline::ReviewImportArgs),
    /// Paraphrase accepted instructions.
    Augment(pipeline::AugmentArgs),
    /// Assemble train and eval splits.
    BuildDataset(pipeline::BuildArgs),
    /// Run a program and print its trajectory.
    Simulate(simulate::SimulateArgs),
    /// Score prediction runs against ground truth.
    Score(score::ScoreArgs),
    /// Serve the reward endpoints over HTTP.
    ServeReward(serve::ServeArgs),
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let settings = Settings::resolve(&cli.global)?;
    match &cli.command {
        Command::SynthInstructions(a) => pipeline::synth_instructions(&settings, a)?,
        Command::Ground(a) => pipeline::ground(&settings, a)?,
        Command::ReviewExport(a) => pipeline::review_export(&settings, a)?,
        Command::ReviewImport(a) => pipeline::review_import(&settings, a)?,
        Command::Augment(a) => pipeline::augment_cmd(&settings, a)?,
        Command::BuildDataset(a) => pipeline::build_dataset_cmd(&settings, a)?,
        Command::Simulate(a) => return simulate::run(&settings, a),
        Command::Score(a) => print!("{}", score::run(&settings, a)?.render_table()),
        Command::ServeReward(a) => serve::run(&settings, a)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("ROBOGROUND_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
