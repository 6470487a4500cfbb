//! Summary statistics over benchmark records: shifted geometric means and
//! medians with failure penalties, and fraction-solved profiles.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::runner::BenchRecord;

pub const SHIFT: f64 = 1.0;

/// Metrics summarized per solver. Counts are penalized with `2 max_iter`
/// on failed runs, wall time with `2 max_time`.
pub const METRICS: [&str; 5] = ["n_f", "n_grad", "n_hess", "n_fact", "wall_seconds"];

pub const PROFILE_GRID_POINTS: usize = 25;
pub const OBJECTIVE_DIFFERENCE: &str = "objective_difference";

/// `exp(mean(ln(v + shift))) - shift`.
pub fn shifted_geomean(values: &[f64], shift: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mean_log = values.iter().map(|v| (v + shift).ln()).sum::<f64>() / values.len() as f64;
    mean_log.exp() - shift
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn raw_metric(rec: &BenchRecord, metric: &str) -> f64 {
    match metric {
        "n_f" => rec.n_f as f64,
        "n_grad" => rec.n_grad as f64,
        "n_hess" => rec.n_hess as f64,
        "n_fact" => rec.n_fact as f64,
        "wall_seconds" => rec.wall_seconds,
        "iterations" => rec.iterations as f64,
        other => panic!("unknown metric {other}"),
    }
}

/// Metric value with the failure penalty applied.
pub fn penalized_metric(rec: &BenchRecord, metric: &str, max_iter: usize, max_time: f64) -> f64 {
    if rec.solved() {
        raw_metric(rec, metric)
    } else if metric == "wall_seconds" {
        2.0 * max_time
    } else {
        2.0 * max_iter as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub solver: String,
    pub metric: String,
    pub runs: usize,
    pub failures: usize,
    pub shifted_geomean: f64,
    pub median: f64,
}

/// One row per solver and metric, solvers in lexicographic order.
pub fn aggregate(records: &[BenchRecord], max_iter: usize, max_time: f64) -> Vec<AggregateRow> {
    let mut by_solver: BTreeMap<&str, Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        by_solver.entry(&r.solver).or_default().push(r);
    }
    let mut rows = Vec::new();
    for (solver, recs) in by_solver {
        let failures = recs.iter().filter(|r| !r.solved()).count();
        for metric in METRICS {
            let values: Vec<f64> = recs
                .iter()
                .map(|r| penalized_metric(r, metric, max_iter, max_time))
                .collect();
            rows.push(AggregateRow {
                solver: solver.to_string(),
                metric: metric.to_string(),
                runs: recs.len(),
                failures,
                shifted_geomean: shifted_geomean(&values, SHIFT),
                median: median(&values),
            });
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub metric: String,
    pub solver: String,
    pub budget: f64,
    pub fraction_solved: f64,
}

/// `points` values log-spaced on `[lo, hi]`, both included, preceded by 0.
fn budget_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return grid;
    }
    if hi == lo || points < 2 {
        grid.push(lo);
        return grid;
    }
    let (a, b) = (lo.log10(), hi.log10());
    for i in 0..points {
        let t = i as f64 / (points - 1) as f64;
        grid.push(10f64.powf(a + t * (b - a)));
    }
    // pin the endpoints against rounding in powf
    grid[1] = lo;
    grid[points] = hi;
    grid
}

fn fraction_rows(
    metric: &str,
    solvers: &BTreeSet<&str>,
    n_problems: usize,
    values: &BTreeMap<&str, Vec<f64>>,
) -> Vec<ProfileRow> {
    let positives = values
        .values()
        .flatten()
        .copied()
        .filter(|v| *v > 0.0 && v.is_finite());
    let lo = positives.clone().fold(f64::INFINITY, f64::min);
    let hi = positives.fold(0.0, f64::max);
    let grid = budget_grid(lo, hi, PROFILE_GRID_POINTS);
    let mut rows = Vec::new();
    for solver in solvers {
        let vals = values.get(solver).map(Vec::as_slice).unwrap_or(&[]);
        for &budget in &grid {
            let within = vals.iter().filter(|v| **v <= budget).count();
            rows.push(ProfileRow {
                metric: metric.to_string(),
                solver: solver.to_string(),
                budget,
                fraction_solved: within as f64 / n_problems as f64,
            });
        }
    }
    rows
}

/// Fraction of problems each solver solved within a budget of each metric,
/// on a shared log-spaced grid, followed by the fraction of problems whose
/// final objective lies within a given distance of the best final objective
/// among all solvers.
pub fn profile(records: &[BenchRecord]) -> Vec<ProfileRow> {
    let solvers: BTreeSet<&str> = records.iter().map(|r| r.solver.as_str()).collect();
    let problems: BTreeSet<&str> = records.iter().map(|r| r.problem.as_str()).collect();
    let n_problems = problems.len().max(1);
    let mut rows = Vec::new();

    for metric in METRICS {
        let mut values: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in records.iter().filter(|r| r.solved()) {
            values.entry(&r.solver).or_default().push(raw_metric(r, metric));
        }
        rows.extend(fraction_rows(metric, &solvers, n_problems, &values));
    }

    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.f_final.is_finite()) {
        let b = best.entry(&r.problem).or_insert(f64::INFINITY);
        *b = b.min(r.f_final);
    }
    let mut diffs: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.f_final.is_finite()) {
        diffs
            .entry(&r.solver)
            .or_default()
            .push(r.f_final - best[r.problem.as_str()]);
    }
    rows.extend(fraction_rows(OBJECTIVE_DIFFERENCE, &solvers, n_problems, &diffs));
    rows
}
