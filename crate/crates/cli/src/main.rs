//! `gibbslab` command-line front end.
//!
//! Exit codes: 0 pass, 1 check failure, 2 budget or horizon exhaustion,
//! 3 invalid input (bad flags, unreadable or malformed files).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "gibbslab", version, about = "Gibbs sampling on sparse random graphs")]
pub struct Cli {
    /// master seed for every randomized stage
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// enumeration budget; overrides the subcommand's configured budget
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// base of the logarithm in radii and α-weight bounds: e, 2 or 10
    #[arg(long, global = true)]
    pub log_base: Option<String>,
    /// output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file overriding the built-in defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a G(n, d/n) edge list.
    Gen(GenArgs),
    /// Check the local sparsity hypothesis on a graph file.
    Check(CheckArgs),
    /// Classify, build the skeleton and blocks, and validate the partition.
    Decompose(DecomposeArgs),
    /// Run a chain and write the final configuration.
    Sample(SampleArgs),
    /// Exact relaxation and mixing times of a small chain.
    Exact(ExactArgs),
    /// Run a named verification suite over the built-in zoo.
    Verify(VerifyArgs),
    /// Coalescence-time scaling table with a log-log slope fit.
    Scaling(ScalingArgs),
    /// One-step contraction and coalescence of an adversarial pair.
    Couple(CoupleArgs),
    /// Print the built-in defaults.
    Defaults,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub n: Option<usize>,
    /// expected degree
    pub d: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HypothesisArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub hyp: HypothesisArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub hyp: HypothesisArgs,
    /// block scale L; defaults to 0.9a/(20t+2)
    #[arg(long)]
    pub l_block: Option<f64>,
    /// cheap-first or cycles-first-descending
    #[arg(long)]
    pub order: Option<String>,
    /// where to write the validation report
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// model file (JSON) or shorthand such as coloring:3, hardcore:0.5
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub lazy: bool,
    /// update rule from the dynamics registry
    #[arg(long)]
    pub dynamics: Option<String>,
    /// partition file for block dynamics
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// starting configuration; a greedy feasible one when absent
    #[arg(long, conflicts_with = "resume")]
    pub init: Option<PathBuf>,
    /// continue from a checkpoint written by an earlier run
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub stride: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub lazy: bool,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// write states, stationary law and transition matrix here
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// suite name, or `all`
    pub suite: String,
    /// keep only instances whose name contains this string
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long)]
    pub d: Option<f64>,
    #[arg(long)]
    pub model: Option<String>,
    /// comma-separated sizes
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// comma-separated seeds, used for each size
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub lazy: bool,
    /// exit 1 when the fitted slope exceeds this
    #[arg(long)]
    pub max_slope: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CoupleArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub lazy: bool,
    /// sampled unit pairs for the contraction probe
    #[arg(long)]
    pub pairs: Option<usize>,
    /// enumerate every unit pair instead of sampling
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long)]
    pub horizon: Option<u64>,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Exhausted,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Exhausted => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            let exhausted = e
                .chain()
                .filter_map(|c| c.downcast_ref::<gibbslab::Error>())
                .any(gibbslab::Error::is_exhaustion);
            ExitCode::from(if exhausted { 2 } else { 3 })
        }
    }
}
