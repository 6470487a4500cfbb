use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cat_core::armijo::{gd_solve, ArmijoConfig};
use cat_core::cat::{solve, SolveResult};
use cat_core::problems::{load_quadratic, make_problem, BoxedObjective};
use cat_core::{SolverConfig, Status};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum SolverKind {
    /// Trust-region method with the default rules.
    Cat,
    /// Trust-region method with the older radius rules: `r1 = 1`, and
    /// `omega1 ||d||` or `||d|| / omega1` as the next radius.
    CatConference,
    /// Gradient descent with Armijo backtracking.
    Gd,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Cat => "cat",
            SolverKind::CatConference => "cat-conference",
            SolverKind::Gd => "gd",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Ablation {
    pub classic_rho: bool,
    pub conference_radius_rule: bool,
    pub fixed_initial_radius: bool,
}

impl Ablation {
    pub const SINGLE_FLAGS: [(&'static str, Ablation); 3] = [
        (
            "classic-rho",
            Ablation {
                classic_rho: true,
                conference_radius_rule: false,
                fixed_initial_radius: false,
            },
        ),
        (
            "conference-radius-rule",
            Ablation {
                classic_rho: false,
                conference_radius_rule: true,
                fixed_initial_radius: false,
            },
        ),
        (
            "fixed-initial-radius",
            Ablation {
                classic_rho: false,
                conference_radius_rule: false,
                fixed_initial_radius: true,
            },
        ),
    ];

    pub fn count(&self) -> usize {
        [
            self.classic_rho,
            self.conference_radius_rule,
            self.fixed_initial_radius,
        ]
        .iter()
        .filter(|b| **b)
        .count()
    }
}

/// Settings shared by every run of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub eps: f64,
    pub max_iter: usize,
    pub max_time: f64,
    pub seed: u64,
    pub r1: Option<f64>,
    pub ablation: Ablation,
    pub trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        let cfg = SolverConfig::default();
        Self {
            eps: cfg.eps_tol,
            max_iter: cfg.max_iter,
            max_time: cfg.max_time,
            seed: cfg.seed,
            r1: None,
            ablation: Ablation::default(),
            trace: false,
        }
    }
}

pub fn solver_config(kind: SolverKind, opts: &RunOptions) -> SolverConfig {
    let conference = kind == SolverKind::CatConference;
    SolverConfig {
        eps_tol: opts.eps,
        max_iter: opts.max_iter,
        max_time: opts.max_time,
        seed: opts.seed,
        r1_override: opts.r1,
        use_classic_rho: opts.ablation.classic_rho,
        conference_radius_rule: conference || opts.ablation.conference_radius_rule,
        fixed_initial_radius: conference || opts.ablation.fixed_initial_radius,
        trace: opts.trace,
        ..SolverConfig::default()
    }
}

pub fn armijo_config(opts: &RunOptions) -> ArmijoConfig {
    ArmijoConfig {
        eps_tol: opts.eps,
        max_iter: opts.max_iter,
        max_time: opts.max_time,
        trace: opts.trace,
        ..ArmijoConfig::default()
    }
}

/// One problem of a suite, written `name:dim`, e.g. `rosenbrock:10` or
/// `convex_quadratic(1000):10`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SuiteEntry {
    pub name: String,
    pub dim: usize,
}

impl SuiteEntry {
    pub fn label(&self) -> String {
        format!("{}:{}", self.name, self.dim)
    }
}

impl fmt::Display for SuiteEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.dim)
    }
}

impl FromStr for SuiteEntry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, dim) = s
            .rsplit_once(':')
            .ok_or_else(|| format!("suite entry `{s}` must be written name:dim"))?;
        let dim = dim
            .trim()
            .parse()
            .map_err(|_| format!("suite entry `{s}` has an invalid dimension"))?;
        Ok(SuiteEntry {
            name: name.trim().to_string(),
            dim,
        })
    }
}

/// Problems used by `bench` and `ablate` when the suite is `all`.
pub const DEFAULT_SUITE: [&str; 9] = [
    "sphere:10",
    "convex_quadratic:10",
    "convex_quadratic(1000):10",
    "rosenbrock:2",
    "rosenbrock:10",
    "extended_rosenbrock:10",
    "powell_singular:8",
    "indefinite_quadratic:4",
    "hard_case_synthetic:10",
];

/// Parses `all` or a comma-separated list; entries without `:dim` use
/// `default_dim`. Every entry is instantiated once so that bad names fail
/// before any run starts.
pub fn parse_suite(spec: &str, default_dim: usize) -> Result<Vec<SuiteEntry>, CliError> {
    let spec = spec.trim();
    let entries: Vec<SuiteEntry> = if spec == "all" {
        DEFAULT_SUITE.iter().map(|s| s.parse().unwrap()).collect()
    } else {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                if s.contains(':') {
                    s.parse().map_err(CliError::Usage)
                } else {
                    Ok(SuiteEntry {
                        name: s.to_string(),
                        dim: default_dim,
                    })
                }
            })
            .collect::<Result<_, _>>()?
    };
    if entries.is_empty() {
        return Err(CliError::Usage("the suite is empty".into()));
    }
    for e in &entries {
        make_problem(&e.name, e.dim).map_err(|err| CliError::Usage(err.to_string()))?;
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSource {
    Builtin(SuiteEntry),
    QuadraticFile(PathBuf),
}

pub struct Problem {
    pub label: String,
    pub oracle: BoxedObjective,
    pub x1: DVector<f64>,
}

pub fn load_problem(source: &ProblemSource) -> Result<Problem, CliError> {
    match source {
        ProblemSource::Builtin(entry) => {
            let (oracle, spec) = make_problem(&entry.name, entry.dim)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(Problem {
                label: entry.label(),
                oracle,
                x1: spec.x1,
            })
        }
        ProblemSource::QuadraticFile(path) => {
            let q = load_quadratic(path).map_err(|e| CliError::Usage(e.to_string()))?;
            let x1 = q.start();
            Ok(Problem {
                label: path.display().to_string(),
                oracle: Box::new(q),
                x1,
            })
        }
    }
}

pub fn run_solver(problem: &Problem, kind: SolverKind, opts: &RunOptions) -> SolveResult {
    match kind {
        SolverKind::Gd => gd_solve(&problem.oracle, &problem.x1, &armijo_config(opts)),
        _ => solve(&problem.oracle, &problem.x1, &solver_config(kind, opts)),
    }
}

/// One row of `records.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub problem: String,
    pub solver: String,
    pub status: String,
    pub iterations: usize,
    pub n_f: u64,
    pub n_grad: u64,
    pub n_hess: u64,
    pub n_fact: u64,
    pub wall_seconds: f64,
    pub f_final: f64,
    pub grad_norm_final: f64,
}

impl BenchRecord {
    pub fn new(problem: &str, solver: &str, result: &SolveResult) -> Self {
        Self {
            problem: problem.to_string(),
            solver: solver.to_string(),
            status: result.status.as_str().to_string(),
            iterations: result.iterations,
            n_f: result.counters.n_f,
            n_grad: result.counters.n_grad,
            n_hess: result.counters.n_hess,
            n_fact: result.counters.n_fact,
            wall_seconds: result.wall_time.as_secs_f64(),
            f_final: result.f_final,
            grad_norm_final: result.grad_norm_final,
        }
    }

    pub fn solved(&self) -> bool {
        self.status == Status::Optimal.as_str()
    }
}
