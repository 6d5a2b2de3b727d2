//! Command-line entry point.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wedgeheat_cli::commands::{self, CommandKind, Invocation};

#[derive(Parser)]
#[command(
    name = "wedgeheat",
    version,
    about = "Heat-trace expansions and model-cone spectra for wedge-like singularities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the closed-form wedge curvature against the direct jet path
    /// at seeded random points.
    Curvature(RunArgs),
    /// Tabulate pointwise heat invariants and resolvent coefficients.
    Invariants(RunArgs),
    /// Compute the logarithmic heat coefficient and, in dimension five,
    /// the spherical-space-form verdict.
    Coefficient(RunArgs),
    /// Emit the resolvent-trace expansion term report.
    Expansion(RunArgs),
    /// Enumerate the model-cone spectrum to CSV.
    Spectrum(RunArgs),
    /// Evaluate the heat trace on a log-spaced time grid to CSV.
    Trace(RunArgs),
    /// Extract the logarithmic coefficient from the spectrum and compare
    /// it with the closed-form prediction.
    #[command(name = "extract-c")]
    ExtractC(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path of the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $WEDGEHEAT_OUT, then the config's
    /// [output] dir, then ./wedgeheat-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trace evaluation (default: $WEDGEHEAT_THREADS,
    /// then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for test-point sampling (default: the config's seed, then a
    /// fixed constant).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Curvature(args) => (CommandKind::Curvature, args),
        Command::Invariants(args) => (CommandKind::Invariants, args),
        Command::Coefficient(args) => (CommandKind::Coefficient, args),
        Command::Expansion(args) => (CommandKind::Expansion, args),
        Command::Spectrum(args) => (CommandKind::Spectrum, args),
        Command::Trace(args) => (CommandKind::Trace, args),
        Command::ExtractC(args) => (CommandKind::ExtractC, args),
    };
    let invocation = Invocation {
        config_path: args.config,
        out_dir: args.out,
        threads: args.threads,
        seed: args.seed,
    };
    match commands::execute(kind, &invocation) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
        }
        Err(e) => {
            eprintln!("wedgeheat: error[{}]: {e}", e.category());
            std::process::exit(e.exit_code());
        }
    }
}
