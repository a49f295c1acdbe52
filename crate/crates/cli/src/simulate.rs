//! `simulate`: run one program and print its trajectory.

use std::io::Read;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use roboground_core::dsl::{execute_source, extract_code};
use roboground_core::{Limits, Trajectory};

use crate::config::Settings;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Program file, or `-` for standard input.
    pub file: PathBuf,
    /// Print the trajectory as JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Treat the input as a model reply and pull the code out of it first.
    #[arg(long)]
    pub extract: bool,
}

/// Returns the process exit code.
pub fn run(settings: &Settings, args: &SimulateArgs) -> Result<i32> {
    let mut source = String::new();
    if args.file.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut source).context("reading standard input")?;
    } else {
        source = std::fs::read_to_string(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    }
    if args.extract {
        source = extract_code(&source).context("no code found in the input")?;
    }
    let profile = settings.robot()?;
    let (trajectory, error): (Trajectory, _) = execute_source(&source, profile, Limits::default());
    if args.json {
        println!("{}", serde_json::to_string_pretty(&trajectory)?);
    } else if error.is_none() {
        print!("{}", trajectory.render_table());
    }
    match error {
        None => Ok(0),
        Some(e) => {
            if !args.json && !trajectory.transitions.is_empty() {
                eprint!("partial trajectory before the error:\n{}", trajectory.render_table());
            }
            eprintln!("error: {e}");
            Ok(1)
        }
    }
}
