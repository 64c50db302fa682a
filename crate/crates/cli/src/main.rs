//! `bertrand`: validate scenarios, search for blocks, check equilibria and
//! run seeded experiments.
//!
//! Exit codes: 0 ok, 1 a checked property is falsified, 2 input or I/O error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bertrand",
    version,
    about = "Bertrand wage competition: blocks, best responses and equilibria"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalOpts {
    /// Classification and equilibrium tolerance (default 0 exact, 1e-9 float).
    #[arg(long, global = true)]
    pub tol: Option<String>,
    /// Outbid increment for best responses and deviations.
    #[arg(long, global = true)]
    pub eta: Option<String>,
    /// Emit a JSON report on standard output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario's allocation and menus for well-formedness.
    Validate { scenario: PathBuf },
    /// Classify the allocation and construct a verified block.
    FindBlock {
        scenario: PathBuf,
        /// Cross-check against exhaustive lattice search.
        #[arg(long)]
        oracle: bool,
        /// Restrict construction to one case (1-6).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
        case: Option<u8>,
        /// Upper bound on the wage increment used by the outbidding cases.
        #[arg(long)]
        epsilon_cap: Option<String>,
        /// Negate the expected outcome (exercises the mismatch path).
        #[arg(long, hide = true)]
        inject_mismatch: bool,
    },
    /// Check whether the scenario's menus form an equilibrium.
    VerifyEq { scenario: PathBuf },
    /// Best-response menu of one firm against the other's scenario menu.
    BestResponse {
        scenario: PathBuf,
        /// The responding firm (1 or 2).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        firm: u8,
        /// Cross-check against exhaustive search over the same wage ladder.
        #[arg(long)]
        oracle: bool,
    },
    /// Exhaustive lattice search for a block on the scenario's allocation.
    Oracle {
        scenario: PathBuf,
        /// Maximum number of lattice assignments to explore.
        #[arg(long)]
        cap: Option<u128>,
    },
    /// Run a seeded batch of random trials from a TOML config.
    Experiment {
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Per-trial CSV rows.
        #[arg(long)]
        rows: Option<PathBuf>,
        /// JSON summary.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match cli.command {
        Command::Validate { scenario } => commands::validate(&scenario, g),
        Command::FindBlock {
            scenario,
            oracle,
            case,
            epsilon_cap,
            inject_mismatch,
        } => commands::find_block(
            &scenario,
            g,
            &commands::BlockOpts {
                oracle,
                case,
                epsilon_cap,
                inject_mismatch,
            },
        ),
        Command::VerifyEq { scenario } => commands::verify_eq(&scenario, g),
        Command::BestResponse { scenario, firm, oracle } => commands::best_response(&scenario, g, firm, oracle),
        Command::Oracle { scenario, cap } => commands::oracle(&scenario, g, cap),
        Command::Experiment {
            config,
            seed,
            trials,
            rows,
            summary,
        } => commands::experiment(&config, g, seed, trials, rows, summary),
    };
    match result {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e}");
            commands::Status::InputError.into()
        }
    }
}
