//! `cknsym` command-line tool.
//!
//! Exit status: 0 on success, 1 on runtime or I/O failure (including a
//! failed group check), 2 on invalid arguments or configuration.

mod commands;
mod run_config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn failure(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<cknsym::Error> for CliError {
    fn from(e: cknsym::Error) -> Self {
        use cknsym::Error::*;
        let code = match e {
            Io(_) | Solver(_) => 1,
            InvalidConfig(_) | InvalidParams(_) | ConfigMismatch(_) | DimensionMismatch { .. } | InvalidArgument(_)
            | Parse(_) => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "cknsym", version, about = "Symmetry groups, codes and an equivariant Nehari solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List admissible configurations (alpha, m) for a dimension and regime.
    Enumerate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        /// a_less_b, a_eq_b_zero or a_eq_b_nonzero.
        #[arg(long)]
        regime: Option<String>,
        #[arg(long)]
        alpha_max: Option<u32>,
        #[arg(long)]
        max_distinct: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the stabilizer, homomorphism and orbit checks on one configuration.
    CheckGroup {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decide whether two configurations are guaranteed to give distinct solutions.
    Distinguish {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the orbit of a point.
    Orbit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the equivariant Nehari descent and write report, field, log and checkpoint.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Results directory.
        #[arg(long, default_value = "run")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Enumerate { config, n, regime, alpha_max, max_distinct, out } => commands::cmd_enumerate(
            commands::EnumerateArgs { config, n, regime, alpha_max, max_distinct },
            out.as_deref(),
        ),
        Command::CheckGroup { config, out, seed } => commands::cmd_check_group(&config, out.as_deref(), seed),
        Command::Distinguish { config, out } => commands::cmd_distinguish(&config, out.as_deref()),
        Command::Orbit { config, out, seed } => commands::cmd_orbit(&config, out.as_deref(), seed),
        Command::Solve { config, out, seed, resume } => commands::cmd_solve(&config, &out, seed, resume.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
