//! Command-line front end: plant ingestion, certified delay-margin bounds,
//! shift-selection heuristic, controller synthesis, and plot-data export.

mod commands;
mod io;

use clap::{Parser, Subcommand};
use marginforge::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "marginforge",
    version,
    about = "Certified delay-margin bounds and controller synthesis for unstable plants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified lower bound on the maximum delay margin.
    Bound(commands::BoundArgs),
    /// Iterative shift-selection heuristic for sharper bounds.
    Homotopy(commands::HomotopyArgs),
    /// Realize a controller achieving the certified margins.
    Synthesize(commands::SynthesizeArgs),
    /// Export frequency-domain data as CSV.
    Plotdata(commands::PlotdataArgs),
}

/// Exit codes: 0 ok, 2 parse, 3 stable plant, 4 shift invalid, 5 infeasible,
/// 6 numerical failure.
fn exit_code(e: &commands::CmdError) -> i32 {
    match e {
        commands::CmdError::Parse(_) => 2,
        commands::CmdError::Core(c) => match c {
            CoreError::StablePlant => 3,
            CoreError::ShiftInvalid(_)
            | CoreError::ShiftHitsCut(_)
            | CoreError::ShiftHitsRegion(_)
            | CoreError::ShiftBlocksProperness(_) => 4,
            CoreError::Infeasible(_)
            | CoreError::InfeasibleAtZero
            | CoreError::InfeasibleDegree(_) => 5,
            _ => 6,
        },
    }
}

fn main() {
    if let Ok(n) = std::env::var("MARGINFORGE_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bound(args) => commands::cmd_bound(&args),
        Command::Homotopy(args) => commands::cmd_homotopy(&args),
        Command::Synthesize(args) => commands::cmd_synthesize(&args),
        Command::Plotdata(args) => commands::cmd_plotdata(&args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
