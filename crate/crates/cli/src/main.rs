//! `rdgmac`: code construction, BER simulation, EXIT analysis, capacity
//! sweeps and nesting verification driven by `key = value` recipes.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Invocation};

const PRECEDENCE: &str = "\
Configuration precedence, lowest to highest: values in the --config file, \
then --set K=V overrides in command-line order, then the dedicated flags \
(--seed, --pair). Relative paths inside a config file resolve against the \
directory holding that file; without --config they resolve against the \
current directory.

Exit status: 0 success, 1 configuration error, 2 construction or \
verification failure, 3 numerical-tolerance failure.";

#[derive(Parser)]
#[command(name = "rdgmac", version, about = "Rate-diverse two-user GMAC laboratory", after_help = PRECEDENCE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a nested code pair and write its alist files and manifest.
    #[command(after_help = PRECEDENCE)]
    Construct(Common),
    /// Simulate bit error rates for one or more schemes.
    #[command(after_help = PRECEDENCE)]
    Ber(Common),
    /// Measure JUD and RUD transfer curves and the tunnel between them.
    #[command(after_help = PRECEDENCE)]
    Exit(Common),
    /// Sweep mutual-information quantities over gains and SNR.
    #[command(after_help = PRECEDENCE)]
    Capacity(Common),
    /// Check the nesting identities of a stored code pair.
    #[command(after_help = PRECEDENCE)]
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Recipe file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file (a directory for `construct`).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed for every random draw; overrides the recipe's seed key.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Override one recipe key; repeatable.
    #[arg(long = "set", value_name = "K=V")]
    overrides: Vec<String>,
    /// Print the planned work without running it.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Code pair directory; overrides the recipe's `pair` key.
    #[arg(long, value_name = "DIR")]
    pair: Option<PathBuf>,
}

fn invocation(c: Common, seed_key: &'static str) -> Result<Invocation, CliError> {
    Invocation::load(c.config, c.out, c.seed.map(|s| (seed_key, s)), c.workers, &c.overrides, c.dry_run)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Construct(c) => commands::construct(&invocation(c, "seed")?),
        Command::Ber(c) => commands::ber(&invocation(c, "master_seed")?),
        Command::Exit(c) => commands::exit(&invocation(c, "seed")?),
        Command::Capacity(c) => commands::capacity(&invocation(c, "seed")?),
        Command::Verify(v) => {
            let mut inv = invocation(v.common, "seed")?;
            if let Some(p) = v.pair {
                inv.set_path("pair", p);
            }
            commands::verify(&inv)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
