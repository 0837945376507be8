mod config;
mod expr;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use run::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "gjlab",
    version,
    about = "Marked groups, Cayley balls and random-walk estimators"
)]
struct Cli {
    /// Flat `key = value` file supplying defaults for the flags below; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an exact verification suite.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
        /// Largest contraction level m (balls of radius 2^m - 1).
        #[arg(long)]
        m: Option<usize>,
        /// Largest eta level k.
        #[arg(long)]
        k: Option<usize>,
        /// Omega word, `(012)*` or `pre|period`.
        #[arg(long)]
        omega: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Estimate one parameter of one group.
    Estimate {
        /// Group expression, e.g. `gj((012)*, {1,3}, 8)`.
        group: String,
        #[arg(value_enum)]
        parameter: Parameter,
        #[command(flatten)]
        est: EstimateArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run one parameter over a list of groups, or the eta-witness matrix.
    Sweep {
        #[arg(value_enum)]
        parameter: SweepParameter,
        /// Group expressions (ignored by eta-witness).
        groups: Vec<String>,
        /// File with one group expression per line.
        #[arg(long)]
        family_file: Option<PathBuf>,
        /// eta-witness: subsets J of {1..universe}.
        #[arg(long)]
        universe: Option<usize>,
        #[arg(long)]
        omega: Option<String>,
        #[command(flatten)]
        est: EstimateArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Export a Cayley ball as an edge list or Graphviz file.
    Ball {
        group: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "edges")]
        format: BallFormat,
        /// Vertex budget; exceeding it exits with status 3.
        #[arg(long)]
        budget: Option<usize>,
        /// Output path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct EstimateArgs {
    /// Walk length, ball radius or word length bound.
    #[arg(long)]
    pub n: Option<usize>,
    /// Percolation ball radius.
    #[arg(long = "R", short = 'R')]
    pub radius: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples for speed; without it speed is computed exactly.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    /// Write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte-identical output).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Parameter {
    Rho,
    PcSite,
    PcBond,
    Entropy,
    Speed,
    Mu,
    Cheeger,
    Growth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParameter {
    Rho,
    PcSite,
    PcBond,
    Entropy,
    Speed,
    Mu,
    Cheeger,
    Growth,
    EtaWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BallFormat {
    Edges,
    Dot,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gjlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
