//! `csdr`: solve chordal conversions of the semidefinite relaxation of AC
//! optimal power flow from the command line.
//!
//! Exit codes: 0 optimal, 1 usage or input error, 2 infeasible, 3 numerical
//! failure or iteration limit.

mod commands;
mod config;
mod error;
mod pipeline;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};
use error::EXIT_USAGE;

#[derive(Parser)]
#[command(name = "csdr", version, about = "Chordal conversion of OPF semidefinite relaxations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one relaxation and write solution, rank, feasibility and count reports.
    Run(Flags),
    /// Compare several relaxations of one network and write a CSV table.
    Bench(Flags),
    /// Write the relaxation in SDPA sparse or CBF format without solving.
    Export(Flags),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Run(f) => RunConfig::from_flags(f, false).and_then(|c| commands::run(&c)),
        Command::Bench(f) => RunConfig::from_flags(f, true).and_then(|c| commands::bench(&c)),
        Command::Export(f) => RunConfig::from_flags(f, false).and_then(|c| commands::export_only(&c)),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("csdr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
