use std::path::PathBuf;
use std::process::ExitCode;

use budget_cli::{run, RunKind};
use clap::{Args, Parser, Subcommand};

/// Consumer budget simulator.
#[derive(Parser)]
#[command(name = "budget", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a budget trajectory (integrator, closed form or per-period recurrence).
    Simulate(Common),
    /// Equilibria and their stability.
    FixedPoints(Common),
    /// Run one scenario per value of a varied parameter.
    Sweep(Common),
    /// Sample the drift db/dt over a budget range.
    PhasePortrait(Common),
    /// Compare numerical integration with the closed-form solution.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config field, e.g. `--set params.a=0.5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Simulate(c) => (RunKind::Simulate, c),
        Command::FixedPoints(c) => (RunKind::FixedPoints, c),
        Command::Sweep(c) => (RunKind::Sweep, c),
        Command::PhasePortrait(c) => (RunKind::PhasePortrait, c),
        Command::Validate(c) => (RunKind::Validate, c),
    };
    match run(kind, common.config.as_deref(), common.out.as_deref(), &common.sets) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            for path in outcome.written {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("budget: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
