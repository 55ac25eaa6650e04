//! `votespan`: PLI queries, ensemble sizing, dependence estimation and
//! stream experiments from the command line.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use votespan_core::Error;

use crate::commands::{EstimateArgs, ExperimentArgs, PliArgs, SimulateArgs, SizeArgs, SynthArgs};

#[derive(Debug, Parser)]
#[command(
    name = "votespan",
    version,
    about = "Ensemble sizing from vote-space linear independence"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the PLI curve of a dependence profile as `n,pli` CSV.
    Pli(PliArgs),
    /// Solve for INC and SINC at a threshold.
    Size(SizeArgs),
    /// Estimate the dependence profile of a vote dump.
    Estimate(EstimateArgs),
    /// Run the dataset × method × size × seed grid and write CSV outputs.
    Experiment(ExperimentArgs),
    /// Run one prequential cell, optionally dumping its votes.
    Simulate(SimulateArgs),
    /// Write a vote dump drawn from the branching dependence process.
    SynthVotes(SynthArgs),
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Resource(_) => 3,
        Error::Numerical(_)
        | Error::RepresentationalDeficiency { .. }
        | Error::UndefinedCorrelation(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut out = std::io::stdout().lock();
    let result = match cli.command {
        Command::Pli(a) => commands::pli(&a, &mut out),
        Command::Size(a) => commands::size(&a, &mut out),
        Command::Estimate(a) => commands::estimate(&a, &mut out),
        Command::Experiment(a) => commands::experiment(&a, &mut out),
        Command::Simulate(a) => commands::simulate(&a, &mut out),
        Command::SynthVotes(a) => commands::synth_votes(&a, &mut out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
