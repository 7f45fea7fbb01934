//! `vacfield` runs one scenario file through a simulation or verification
//! suite, writes CSV/JSON artifacts and exits 0 only if every tolerance holds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{CliError, Output};

#[derive(Parser)]
#[command(name = "vacfield", version, about = "Vacuum-field particle, wave and quantum verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the scenario's output_dir, else ./out).
    #[arg(long, env = "VACFIELD_OUT_DIR")]
    out: Option<PathBuf>,
    /// Seed for random probe sets; overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the per-check summary on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate each configured model; trajectory CSVs and an energy-drift summary.
    Simulate(Common),
    /// Run exactly two models and report their deviation.
    Compare(Common),
    /// Classical vs modified Lorentz force at random states.
    Forces(Common),
    /// Evolve the wave equations and report Maxwell residuals and convergence.
    Maxwell(Common),
    /// Crank-Nicolson runs, dispersion and model-gap tables.
    Quantum(Common),
    /// Legendre, Euler-Lagrange and gradient-vs-finite-difference suites.
    Checks(Common),
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Compare(c) => ("compare", c),
        Command::Forces(c) => ("forces", c),
        Command::Maxwell(c) => ("maxwell", c),
        Command::Quantum(c) => ("quantum", c),
        Command::Checks(c) => ("checks", c),
    };
    let sc = config::load(&common.config).map_err(|e| CliError::Config(e.0))?;
    let dir = common
        .out
        .clone()
        .or_else(|| sc.raw.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = Output::new(&dir, sc.name())?;
    let seed = common.seed.unwrap_or(sc.raw.seed);
    let report = match cli.command {
        Command::Simulate(_) => commands::simulate_cmd(&sc, &out),
        Command::Compare(_) => commands::compare_cmd(&sc, &out),
        Command::Forces(_) => commands::forces_cmd(&sc, &out, seed),
        Command::Maxwell(_) => commands::maxwell_cmd(&sc, &out),
        Command::Quantum(_) => commands::quantum_cmd(&sc, &out),
        Command::Checks(_) => commands::checks_cmd(&sc, &out, seed),
    }?;
    if !common.quiet {
        report.print(&format!("{} {name}", sc.name()));
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("tolerance failed: {} = {:e} (need {})", c.name, c.value, c.limit);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("vacfield: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
