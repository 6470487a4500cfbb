//! Command-line harness for the trust-region solver and its gradient-descent
//! baseline: single runs, benchmark sweeps and ablations.

pub mod aggregate;
pub mod args;
pub mod output;
pub mod runner;

use std::ffi::OsString;
use std::path::Path;

use cat_core::Status;
use clap::Parser;
use rayon::prelude::*;
use thiserror::Error;

use args::{AblateArgs, BenchArgs, Cli, Command, Format, RunArgs};
use runner::{
    load_problem, parse_suite, run_solver, Ablation, BenchRecord, ProblemSource, RunOptions,
    SolverKind, SuiteEntry,
};

pub const EXIT_OPTIMAL: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OPTIMAL };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Bench(a) => cmd_bench(&a).map(|_| EXIT_OPTIMAL),
        Command::Ablate(a) => cmd_ablate(&a).map(|_| EXIT_OPTIMAL),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("catopt: {e}");
            e.exit_code()
        }
    }
}

fn check_limits(opts: &RunOptions) -> Result<(), CliError> {
    if !(opts.eps >= 0.0) {
        return Err(CliError::Usage(format!("--eps must be >= 0, got {}", opts.eps)));
    }
    if opts.max_iter == 0 {
        return Err(CliError::Usage("--max-iter must be positive".into()));
    }
    if !(opts.max_time > 0.0) {
        return Err(CliError::Usage(format!(
            "--max-time must be positive, got {}",
            opts.max_time
        )));
    }
    if let Some(r1) = opts.r1 {
        if !(r1 > 0.0 && r1.is_finite()) {
            return Err(CliError::Usage(format!("--r1 must be positive, got {r1}")));
        }
    }
    Ok(())
}

fn check_ablation(solvers: &[SolverKind], ablation: &Ablation) -> Result<(), CliError> {
    if ablation.count() > 0 && solvers.contains(&SolverKind::Gd) {
        return Err(CliError::Usage(
            "ablation flags apply to the trust-region solvers only".into(),
        ));
    }
    Ok(())
}

/// Exit code for a finished run.
pub fn status_exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal => EXIT_OPTIMAL,
        Status::ConfigError => EXIT_USAGE,
        _ => EXIT_NOT_CONVERGED,
    }
}

pub fn cmd_run(a: &RunArgs) -> Result<i32, CliError> {
    let ablation = Ablation::from(a.ablation);
    check_ablation(&[a.solver], &ablation)?;
    let opts = a.limits.options(ablation, a.trace.is_some());
    check_limits(&opts)?;
    let source = match (&a.quadratic_file, &a.problem) {
        (Some(path), _) => ProblemSource::QuadraticFile(path.clone()),
        (None, Some(name)) => ProblemSource::Builtin(SuiteEntry {
            name: name.clone(),
            dim: a.dim,
        }),
        (None, None) => return Err(CliError::Usage("--problem is required".into())),
    };
    let problem = load_problem(&source)?;
    let result = run_solver(&problem, a.solver, &opts);
    if result.status == Status::ConfigError {
        return Err(CliError::Usage("invalid solver configuration".into()));
    }
    if let Some(path) = &a.trace {
        output::write_trace(path, &result)?;
    }
    let record = BenchRecord::new(&problem.label, a.solver.as_str(), &result);
    println!("{}", output::format_record(&record, a.format == Format::Json)?);
    Ok(status_exit_code(result.status))
}

/// Runs every `(entry, label)` pair in parallel; records come back sorted by
/// `(problem, solver)`.
pub fn run_matrix<F>(suite: &[SuiteEntry], variants: &[(String, F)]) -> Result<Vec<BenchRecord>, CliError>
where
    F: Fn(&runner::Problem) -> cat_core::SolveResult + Sync,
{
    let jobs: Vec<(&SuiteEntry, &(String, F))> = suite
        .iter()
        .flat_map(|e| variants.iter().map(move |v| (e, v)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|(entry, (label, solve))| {
            let problem = load_problem(&ProblemSource::Builtin((*entry).clone()))?;
            Ok(BenchRecord::new(&problem.label, label, &solve(&problem)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    records.sort_by(|a, b| (&a.problem, &a.solver).cmp(&(&b.problem, &b.solver)));
    Ok(records)
}

fn write_outputs(
    out_dir: &Path,
    records: &[BenchRecord],
    opts: &RunOptions,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    output::write_records(&out_dir.join("records.csv"), records)?;
    let rows = aggregate::aggregate(records, opts.max_iter, opts.max_time);
    output::write_aggregates(&out_dir.join("aggregates.csv"), &rows, opts.max_iter, opts.max_time)?;
    output::write_profile(&out_dir.join("profile.csv"), &aggregate::profile(records))?;
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> Result<Vec<BenchRecord>, CliError> {
    let ablation = Ablation::from(a.ablation);
    check_ablation(&a.solvers, &ablation)?;
    if a.solvers.is_empty() {
        return Err(CliError::Usage("no solvers given".into()));
    }
    let opts = a.limits.options(ablation, false);
    check_limits(&opts)?;
    let suite = parse_suite(&a.suite, a.dim)?;
    let mut solvers = a.solvers.clone();
    solvers.sort();
    solvers.dedup();
    let variants: Vec<_> = solvers
        .iter()
        .map(|&kind| {
            let opts = opts.clone();
            (kind.as_str().to_string(), move |p: &runner::Problem| {
                run_solver(p, kind, &opts)
            })
        })
        .collect();
    let records = run_matrix(&suite, &variants)?;
    write_outputs(&a.out_dir, &records, &opts)?;
    Ok(records)
}

/// Writes the ablation records and aggregates (`records.csv`,
/// `aggregates.csv`, `profile.csv`) with the variant name in the solver
/// column.
pub fn cmd_ablate(a: &AblateArgs) -> Result<Vec<BenchRecord>, CliError> {
    let requested = Ablation::from(a.ablation);
    if requested.count() > 1 {
        return Err(CliError::Usage(
            "ablations are single-flag only; pass at most one ablation flag".into(),
        ));
    }
    let base = a.limits.options(Ablation::default(), false);
    check_limits(&base)?;
    let suite = parse_suite(&a.suite, a.dim)?;

    let mut chosen = vec![("default".to_string(), Ablation::default())];
    for (name, flags) in Ablation::SINGLE_FLAGS {
        if requested.count() == 0 || requested == flags {
            chosen.push((name.to_string(), flags));
        }
    }
    let variants: Vec<_> = chosen
        .into_iter()
        .map(|(name, flags)| {
            let opts = RunOptions {
                ablation: flags,
                ..base.clone()
            };
            (name, move |p: &runner::Problem| run_solver(p, SolverKind::Cat, &opts))
        })
        .collect();
    let records = run_matrix(&suite, &variants)?;
    write_outputs(&a.out_dir, &records, &base)?;
    Ok(records)
}
