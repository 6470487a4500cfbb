//! CSV and JSON writers. Every CSV starts with one `#` line naming its
//! schema and version.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use cat_core::cat::{SolveResult, Trace};
use serde::Serialize;

use crate::aggregate::{AggregateRow, ProfileRow};
use crate::runner::BenchRecord;
use crate::CliError;

pub const RECORDS_SCHEMA: &str = "cat-bench records v1";
pub const AGGREGATES_SCHEMA: &str = "cat-bench aggregates v1";
pub const PROFILE_SCHEMA: &str = "cat-bench profile v1";
pub const TRACE_SCHEMA: &str = "cat-bench trace v1";

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `# {header}` followed by the serialized rows.
pub fn write_csv<T: Serialize>(path: &Path, header: &str, rows: &[T]) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# {header}").map_err(io_error(path))?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    w.flush().map_err(io_error(path))?;
    Ok(())
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<(), CliError> {
    write_csv(path, RECORDS_SCHEMA, records)
}

pub fn write_aggregates(
    path: &Path,
    rows: &[AggregateRow],
    max_iter: usize,
    max_time: f64,
) -> Result<(), CliError> {
    let header = format!(
        "{AGGREGATES_SCHEMA} shift={} max_iter={max_iter} max_time={max_time}",
        crate::aggregate::SHIFT
    );
    write_csv(path, &header, rows)
}

pub fn write_profile(path: &Path, rows: &[ProfileRow]) -> Result<(), CliError> {
    write_csv(path, PROFILE_SCHEMA, rows)
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
    rdr.deserialize()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Csv {
            path: path.display().to_string(),
            source: e,
        })
}

#[derive(Serialize)]
struct TrustRegionRow {
    k: usize,
    f: f64,
    grad_norm: f64,
    radius: f64,
    step_norm: f64,
    delta: f64,
    hard_case: bool,
    model_value: f64,
    f_trial: f64,
    b_k: f64,
    trial_grad_norm: Option<f64>,
    rho: f64,
    accepted: bool,
    successful: bool,
    eps: f64,
    n_f: u64,
    n_grad: u64,
    n_hess: u64,
    n_fact: u64,
}

#[derive(Serialize)]
struct GradientDescentRow {
    k: usize,
    f: f64,
    grad_norm: f64,
    eta: f64,
    backtracks: usize,
    f_next: f64,
    n_f: u64,
    n_grad: u64,
}

/// Per-iteration trace; a run without a trace yields a header-only file.
pub fn write_trace(path: &Path, result: &SolveResult) -> Result<(), CliError> {
    match &result.trace {
        Some(Trace::GradientDescent(recs)) => {
            let rows: Vec<_> = recs
                .iter()
                .map(|r| GradientDescentRow {
                    k: r.k,
                    f: r.f,
                    grad_norm: r.grad_norm,
                    eta: r.eta,
                    backtracks: r.backtracks,
                    f_next: r.f_next,
                    n_f: r.counters.n_f,
                    n_grad: r.counters.n_grad,
                })
                .collect();
            write_csv(path, &format!("{TRACE_SCHEMA} gd"), &rows)
        }
        Some(Trace::TrustRegion(recs)) => {
            let rows: Vec<_> = recs
                .iter()
                .map(|r| TrustRegionRow {
                    k: r.k,
                    f: r.f,
                    grad_norm: r.grad_norm,
                    radius: r.radius,
                    step_norm: r.step_norm,
                    delta: r.delta,
                    hard_case: r.hard_case,
                    model_value: r.model_value,
                    f_trial: r.f_trial,
                    b_k: r.b_k,
                    trial_grad_norm: r.trial_grad_norm,
                    rho: r.rho,
                    accepted: r.accepted,
                    successful: r.successful,
                    eps: r.eps_after,
                    n_f: r.counters.n_f,
                    n_grad: r.counters.n_grad,
                    n_hess: r.counters.n_hess,
                    n_fact: r.counters.n_fact,
                })
                .collect();
            write_csv(path, &format!("{TRACE_SCHEMA} trust-region"), &rows)
        }
        None => write_csv::<TrustRegionRow>(path, &format!("{TRACE_SCHEMA} empty"), &[]),
    }
}

/// The record as a single CSV data row preceded by the schema line and the
/// column header, or as one JSON object.
pub fn format_record(record: &BenchRecord, json: bool) -> Result<String, CliError> {
    if json {
        return serde_json::to_string(record).map_err(|e| CliError::Internal(e.to_string()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(record)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let body = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(format!("# {RECORDS_SCHEMA}\n{}", body.trim_end()))
}
