//! `shrink`: command-line front end of the shrinker laboratory.

mod commands;
mod config;
mod error;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, Flags, RunConfig, SweepPlan};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "shrink", version, about = "Speed functions, shrinkers and normalized curvature flows")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Sample the structural inequalities of a speed function.
    CheckFn(Flags),
    /// Newton solve of the Euclidean shrinker equation from a perturbed sphere.
    Solve(Flags),
    /// Run the normalized flow until the body is round.
    Flow(Flags),
    /// Radius and residual of the shrinking slice in the hemisphere.
    Slice(Flags),
    /// Dump the maximum-principle quantities of a profile.
    Quantities(Flags),
    /// Run solves or flows over a parameter grid.
    Sweep(Flags),
}

fn execute(command: Command, flags: &Flags) -> Result<commands::Outcome, CliError> {
    let (mut cfg, file) = RunConfig::resolve(command, flags)?;
    if command == Command::Sweep {
        let plan = SweepPlan::resolve(&cfg, flags, &file)?;
        let jobs = plan.jobs(&cfg, flags, &file)?;
        commands::sweep(&cfg, &plan, jobs)
    } else {
        commands::run(&mut cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::config(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    let (command, flags) = match &cli.command {
        Sub::CheckFn(f) => (Command::CheckFn, f),
        Sub::Solve(f) => (Command::Solve, f),
        Sub::Flow(f) => (Command::Flow, f),
        Sub::Slice(f) => (Command::Slice, f),
        Sub::Quantities(f) => (Command::Quantities, f),
        Sub::Sweep(f) => (Command::Sweep, f),
    };
    match execute(command, flags) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            match outcome.failure {
                None => ExitCode::SUCCESS,
                Some(err) => {
                    eprintln!("{}", err.to_json());
                    ExitCode::from(err.exit_code as u8)
                }
            }
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code as u8)
        }
    }
}
