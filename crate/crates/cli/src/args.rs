use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::runner::{Ablation, RunOptions, SolverKind};

#[derive(Debug, Parser)]
#[command(
    name = "catopt",
    version,
    about = "Adaptive trust-region minimization and benchmark harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver on one problem and print its record.
    Run(RunArgs),
    /// Run a solver matrix over a problem suite and write records.csv,
    /// aggregates.csv and profile.csv.
    Bench(BenchArgs),
    /// Compare the default trust-region configuration against single-flag
    /// ablations. The subproblem-solver ablation is not available.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// Gradient-norm tolerance.
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    #[arg(long = "max-iter", default_value_t = 100_000)]
    pub max_iter: usize,
    /// Wall-clock limit per run, in seconds.
    #[arg(long = "max-time", default_value_t = 18_000.0)]
    pub max_time: f64,
    /// Seed for the random vectors of the subproblem solver.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Initial trust-region radius, overriding the heuristic.
    #[arg(long)]
    pub r1: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct AblationArgs {
    /// Use the classical reduction ratio.
    #[arg(long = "classic-rho")]
    pub classic_rho: bool,
    /// Radius becomes omega1 ||d|| on success and ||d|| / omega1 otherwise.
    #[arg(long = "conference-radius-rule")]
    pub conference_radius_rule: bool,
    /// Start from radius 1.
    #[arg(long = "fixed-initial-radius")]
    pub fixed_initial_radius: bool,
}

impl From<AblationArgs> for Ablation {
    fn from(a: AblationArgs) -> Self {
        Ablation {
            classic_rho: a.classic_rho,
            conference_radius_rule: a.conference_radius_rule,
            fixed_initial_radius: a.fixed_initial_radius,
        }
    }
}

impl LimitArgs {
    pub fn options(&self, ablation: Ablation, trace: bool) -> RunOptions {
        RunOptions {
            eps: self.eps,
            max_iter: self.max_iter,
            max_time: self.max_time,
            seed: self.seed,
            r1: self.r1,
            ablation,
            trace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Builtin problem name, e.g. rosenbrock or convex_quadratic(1000).
    #[arg(long, required_unless_present = "quadratic_file")]
    pub problem: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_enum, default_value_t = SolverKind::Cat)]
    pub solver: SolverKind,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[command(flatten)]
    pub ablation: AblationArgs,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Read a quadratic problem from a text file instead of the catalog.
    #[arg(long = "quadratic-file", conflicts_with = "problem")]
    pub quadratic_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `all` or a comma-separated list of `name:dim` entries.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Dimension for suite entries written without `:dim`.
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "cat,gd")]
    pub solvers: Vec<SolverKind>,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[command(flatten)]
    pub ablation: AblationArgs,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// `all` or a comma-separated list of `name:dim` entries.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    #[arg(long = "out-dir")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Restricts the comparison to this one ablation; without a flag all
    /// three are run.
    #[command(flatten)]
    pub ablation: AblationArgs,
}
