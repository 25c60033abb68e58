//! `coulomb-mot`: radial Coulomb costs, Seidl maps, discrete solves and
//! counterexample densities from the command line.

mod commands;
mod output;
mod sweep;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coulomb_mot::radialcost::MinimizeOptions;

use output::{Failure, Report};

#[derive(Parser, Debug)]
#[command(name = "coulomb-mot", version, about)]
struct Cli {
    /// Emit one JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Nodes per axis of the angular grid used by every cost minimization.
    #[arg(long, global = true, default_value_t = 256)]
    grid: usize,

    /// Target accuracy of minimized cost values.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial cost of one radius triple.
    Cost(commands::CostArgs),
    /// Build a Seidl map of a density file and tabulate it.
    Map(commands::MapArgs),
    /// Discretize a density and compare exact discrete optima with pattern plans.
    Solve(commands::SolveArgs),
    /// Pairwise swap probes on the graph of a Seidl map.
    Probe(commands::ProbeArgs),
    /// Build a counterexample density and its violation certificates.
    Counterexample(commands::CounterexampleArgs),
    /// Deterministic CSV sweeps for plotting.
    Sweep(sweep::SweepArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let opts = MinimizeOptions {
        grid: cli.grid,
        tol: cli.tol,
        ..MinimizeOptions::default()
    };
    let (name, result): (&str, Result<Report, Failure>) = match &cli.command {
        Command::Cost(a) => ("cost", commands::cost(a, &opts)),
        Command::Map(a) => ("map", commands::map(a)),
        Command::Solve(a) => ("solve", commands::solve(a, &opts)),
        Command::Probe(a) => ("probe", commands::probe(a, &opts)),
        Command::Counterexample(a) => ("counterexample", commands::counterexample(a, &opts)),
        Command::Sweep(a) => ("sweep", sweep::run(a, &opts)),
    };
    let globals = serde_json::json!({ "grid": cli.grid, "tol": cli.tol });
    match result {
        Ok(report) => report.emit(name, &globals, cli.json),
        Err(f) => f.emit(name, cli.json),
    }
}
