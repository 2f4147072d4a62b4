//! `igm`: command-line front end for the interaction-graph machine engine.
//!
//! Exit codes: 0 pass or agreement, 1 fail or disagreement, 2 error.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ig_core::encodings::ExtractMode;
use ig_core::words::Psi;

#[derive(Parser)]
#[command(name = "igm", version, about = "Decide words with graphing machines and multihead automata")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct RunConfig {
    /// Vertex table: `default` or `alt`.
    #[arg(long, global = true, default_value = "default")]
    pub psi: Psi,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureMode {
    Exact,
    Series,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Verbatim,
    Preamble,
}

impl From<Mode> for ExtractMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Verbatim => ExtractMode::Verbatim,
            Mode::Preamble => ExtractMode::Preamble,
        }
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Decide one word with a machine against the reject test.
    Decide {
        #[arg(long)]
        machine: PathBuf,
        /// Binary word; the empty string is the empty word.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Also check the verdict under this many random dialect renamings.
        #[arg(long, default_value_t = 0)]
        renamings: usize,
    },
    /// Compare an automaton with its encoded machine on all short words.
    Compare {
        /// Automaton JSON file or packaged name.
        automaton: String,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
    /// Encode, essentialize and extract again; compare languages.
    Roundtrip {
        automaton: String,
        #[arg(long, default_value_t = 5)]
        max_len: usize,
        #[arg(long, value_enum, default_value_t = Mode::Preamble)]
        mode: Mode,
    },
    /// Write the machine encoding an automaton.
    EncodeAutomaton {
        automaton: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write an automaton simulating an essential machine.
    ExtractAutomaton {
        machine: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Preamble)]
        mode: Mode,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rewrite a machine so every map is a single star transposition.
    Essentialize {
        machine: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Execute two graphings over a cut.
    Exec {
        f: PathBuf,
        g: PathBuf,
        /// Cut: comma-separated unit blocks `k` or line intervals `a..b`.
        #[arg(long)]
        cut: String,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List alternating paths between two graphings.
    Paths {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
    },
    /// Measure two graphings.
    Measure {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, value_enum, default_value_t = MeasureMode::Exact)]
        mode: MeasureMode,
        /// Series tolerance as a rational.
        #[arg(long, default_value = "1/1073741824")]
        tol: String,
    },
    /// Check the trace to path correspondence on one word.
    Correspond {
        automaton: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value_t = 12)]
        max_steps: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.config, cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
