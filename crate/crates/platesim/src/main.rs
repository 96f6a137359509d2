use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use platesim::config::RunMode;

/// Spectral simulation and control synthesis for nonlinear hinged plates.
#[derive(Parser)]
#[command(name = "platesim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time integration of the damped or undamped plate.
    Simulate(ModeArgs),
    /// Gramian observability estimates (Schrödinger, plate, or nonlinear).
    Observability(ModeArgs),
    /// HUM linear control to zero.
    Hum(ModeArgs),
    /// Nonlinear local control around an equilibrium.
    #[command(name = "local-control")]
    LocalControl(ModeArgs),
    /// Semiglobal steering between states through the attractor.
    Steer(ModeArgs),
    /// Newton solves for the equilibrium set.
    Equilibria(ModeArgs),
}

#[derive(Args)]
struct ModeArgs {
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration entry: --set section.key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides output.directory).
    #[arg(long)]
    out: Option<String>,
    /// Random seed (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Simulate(a) => (RunMode::Simulate, a),
        Command::Observability(a) => (RunMode::Observability, a),
        Command::Hum(a) => (RunMode::Hum, a),
        Command::LocalControl(a) => (RunMode::LocalControl, a),
        Command::Steer(a) => (RunMode::Steer, a),
        Command::Equilibria(a) => (RunMode::Equilibria, a),
    };
    let code = platesim::runner::execute(
        mode,
        &args.config,
        &args.set,
        args.out.as_deref(),
        args.seed,
    );
    ExitCode::from(code as u8)
}
