//! `dapt`: command-line front end for arranging trees on regular trees.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dapt_core::DaptError;

#[derive(Debug, Parser)]
#[command(name = "dapt", version, about = "Data arrangement on regular trees")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Dapt,
    Kbpp,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the approximation on the complete binary tree of height H.
    Arrange {
        #[arg(long)]
        height: u32,
        /// Also write the arrangement as JSON.
        #[arg(long)]
        emit_json: Option<PathBuf>,
    },
    /// Validate and score an arrangement document.
    Evaluate {
        #[arg(long)]
        arrangement: PathBuf,
    },
    /// Build the optimal 2^K-balanced partition of the complete binary tree of height H.
    Kbpp {
        #[arg(long)]
        height: u32,
        #[arg(long)]
        kprime: u32,
        #[arg(long)]
        emit_json: Option<PathBuf>,
    },
    /// Lower bound on the optimum for the complete binary tree of height H.
    Bound {
        #[arg(long)]
        height: u32,
    },
    /// Ratio function and the certified ratio at height H.
    Ratio {
        #[arg(long)]
        height: u32,
    },
    /// Per-level profile against the bound for every height up to min(H, 5).
    Tables {
        #[arg(long)]
        max_height: u32,
    },
    /// Exhaustive search on a small instance.
    Exact {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Height of the complete binary guest tree.
        #[arg(long, conflicts_with = "star")]
        height: Option<u32>,
        /// Use a star with this many vertices as the guest (dapt mode only).
        #[arg(long)]
        star: Option<usize>,
        /// Number of blocks is 2^K (kbpp mode only).
        #[arg(long)]
        kprime: Option<u32>,
        #[arg(long, default_value_t = 2)]
        degree: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Maximum node visits; falls back to DAPT_BUDGET, then the built-in default.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Build the tree gadget for an NMTS instance.
    ReduceNmts {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        degree: u64,
        /// Matching for x, e.g. `2,1`; evaluates the witness arrangement.
        #[arg(long, value_delimiter = ',', requires = "perm_k")]
        perm_j: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', requires = "perm_j")]
        perm_k: Option<Vec<usize>>,
        #[arg(long)]
        emit_json: Option<PathBuf>,
    },
}

/// Bad flag combinations detected after parsing.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Unreadable input files.
#[derive(Debug)]
pub struct BadInput(pub String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<Usage>() {
        return 2;
    }
    if err.is::<BadInput>() {
        return 3;
    }
    match err.downcast_ref::<DaptError>() {
        Some(DaptError::InvalidParameter(_) | DaptError::Overflow(_)) => 2,
        Some(DaptError::BudgetExceeded { .. }) => 4,
        Some(DaptError::Internal(_)) | None => 1,
        Some(_) => 3,
    }
}

fn run(cli: Cli) -> anyhow::Result<String> {
    let f = cli.format;
    match cli.command {
        Command::Arrange { height, emit_json } => commands::arrange(height, emit_json.as_deref(), f),
        Command::Evaluate { arrangement } => commands::evaluate(&arrangement, f),
        Command::Kbpp { height, kprime, emit_json } => commands::kbpp(height, kprime, emit_json.as_deref(), f),
        Command::Bound { height } => commands::bound(height, f),
        Command::Ratio { height } => commands::ratio(height, f),
        Command::Tables { max_height } => commands::tables(max_height, f),
        Command::Exact { mode, height, star, kprime, degree, threads, budget } => {
            let opts = commands::ExactOpts { mode, height, star, kprime, degree, threads, budget };
            commands::exact(&opts, f)
        }
        Command::ReduceNmts { input, degree, perm_j, perm_k, emit_json } => {
            let perms = perm_j.zip(perm_k);
            commands::reduce_nmts(&input, degree, perms, emit_json.as_deref(), f)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
