//! The adaptive trust-region outer loop.
//!
//! Each iteration solves the subproblem inexactly, evaluates the trial point,
//! and evaluates the trial gradient only when `f(x + d) <= f(x) + b_k`. The
//! smallest gradient norm seen at qualifying points is the running tolerance
//! `eps_k`; the run is optimal as soon as `eps_k <= eps_tol`, and the point
//! that achieved it is returned.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::armijo::ArmijoRecord;
use crate::config::{validate_config, BkCoefficients, SolverConfig, Status};
use crate::model::{model_value, rho_classic, rho_hat};
use crate::oracle::{Counters, CountingOracle, Objective};
use crate::trs::{certify, solve_subproblem, Gammas, SubproblemInput};

/// Diagnostics for one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub radius: f64,
    pub step_norm: f64,
    pub delta: f64,
    pub hard_case: bool,
    pub model_value: f64,
    pub f_trial: f64,
    pub b_k: f64,
    /// Present iff the trial gradient was evaluated.
    pub trial_grad_norm: Option<f64>,
    /// The ratio used for the decisions (classic or augmented).
    pub rho: f64,
    pub accepted: bool,
    pub successful: bool,
    pub eps_before: f64,
    pub eps_after: f64,
    pub radius_next: f64,
    pub counters: Counters,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    TrustRegion(Vec<IterationRecord>),
    GradientDescent(Vec<ArmijoRecord>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Point with the smallest observed gradient norm.
    pub x_final: DVector<f64>,
    pub f_final: f64,
    pub grad_norm_final: f64,
    pub iterations: usize,
    pub counters: Counters,
    pub wall_time: Duration,
    pub trace: Option<Trace>,
}

impl SolveResult {
    pub fn trust_region_trace(&self) -> Option<&[IterationRecord]> {
        match &self.trace {
            Some(Trace::TrustRegion(t)) => Some(t),
            _ => None,
        }
    }

    pub fn gradient_descent_trace(&self) -> Option<&[ArmijoRecord]> {
        match &self.trace {
            Some(Trace::GradientDescent(t)) => Some(t),
            _ => None,
        }
    }
}

/// Running state of the outer loop.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: DVector<f64>,
    pub f_x: f64,
    pub g_x: DVector<f64>,
    pub g_x_norm: f64,
    pub radius: f64,
    pub eps: f64,
    pub delta_warm: f64,
    pub best: BestPoint,
    pub k: usize,
    pub t_start: Instant,
}

/// The point that realized the current `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct BestPoint {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad_norm: f64,
}

const SPECTRAL_NORM_ITERATIONS: usize = 50;
const SPECTRAL_NORM_RTOL: f64 = 1e-6;
const SPECTRAL_NORM_FLOOR: f64 = 1e-30;

/// Power-iteration estimate of `||H||_2`, started from the normalized
/// all-ones vector. If that vector lies in the null space, the start is moved
/// to the coordinate vector of the largest column.
pub fn spectral_norm_estimate(h: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    if (h * &v).norm() == 0.0 {
        let (col, norm) = h
            .column_iter()
            .map(|c| c.norm())
            .enumerate()
            .fold((0, 0.0), |acc, (i, c)| if c > acc.1 { (i, c) } else { acc });
        if norm == 0.0 {
            return 0.0;
        }
        v = DVector::zeros(n);
        v[col] = 1.0;
    }
    let mut estimate = 0.0;
    for _ in 0..SPECTRAL_NORM_ITERATIONS {
        let w = h * &v;
        let next = w.norm();
        if next == 0.0 || !next.is_finite() {
            return next;
        }
        v = w / next;
        let converged = (next - estimate).abs() <= SPECTRAL_NORM_RTOL * next;
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}

/// Initial radius: the override, 1 for the fixed-radius variant, otherwise
/// `10 ||g1|| / ||H1||` (1 when either norm vanishes).
pub fn initial_radius(g1: &DVector<f64>, h1: &DMatrix<f64>, cfg: &SolverConfig) -> f64 {
    if let Some(r1) = cfg.r1_override {
        return r1;
    }
    if cfg.fixed_initial_radius {
        return 1.0;
    }
    let g_norm = g1.norm();
    let h_norm = spectral_norm_estimate(h1);
    if h_norm < SPECTRAL_NORM_FLOOR || g_norm == 0.0 {
        return 1.0;
    }
    let r1 = 10.0 * g_norm / h_norm;
    if r1.is_finite() && r1 > 0.0 {
        r1
    } else {
        1.0
    }
}

/// `b_k = 0.1 eps_k ||d_k|| + 1e-8 (|f(x_k)| + 1)`.
pub fn compute_b_k(eps_k: f64, d_norm: f64, f_k: f64) -> f64 {
    BkCoefficients::default().evaluate(eps_k, d_norm, f_k)
}

/// Radius for the next iteration given the ratio of this one.
pub fn radius_update(radius: f64, d_norm: f64, rho: f64, cfg: &SolverConfig) -> f64 {
    let successful = rho >= cfg.beta;
    match (cfg.conference_radius_rule, successful) {
        (false, true) => (cfg.omega2 * d_norm).max(radius),
        (false, false) => radius / cfg.omega1,
        (true, true) => cfg.omega1 * d_norm,
        (true, false) => d_norm / cfg.omega1,
    }
}

/// Next `eps`: the minimum of `eps_k` and the trial gradient norm when the
/// trial value is within `b_k` of `f_k`, otherwise `eps_k`.
///
/// # Panics
///
/// If the trial gradient norm is missing on the qualifying branch.
pub fn epsilon_update(
    eps_k: f64,
    f_k: f64,
    f_trial: f64,
    b_k: f64,
    trial_grad_norm: Option<f64>,
) -> f64 {
    if f_trial <= f_k + b_k {
        let norm = trial_grad_norm
            .expect("trial gradient norm is required when f_trial <= f_k + b_k");
        eps_k.min(norm)
    } else {
        eps_k
    }
}

/// A step is accepted iff it does not increase `f` and its ratio reaches `sigma`.
pub fn step_decision(f_k: f64, f_trial: f64, rho: f64, cfg: &SolverConfig) -> bool {
    f_trial <= f_k && rho >= cfg.sigma
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

struct Run<'o, O: ?Sized> {
    oracle: CountingOracle<&'o O>,
    trace: Option<Vec<IterationRecord>>,
    trace_capacity: usize,
}

impl<O: Objective + ?Sized> Run<'_, O> {
    fn finish(
        self,
        status: Status,
        best: BestPoint,
        iterations: usize,
        t_start: Instant,
    ) -> SolveResult {
        SolveResult {
            status,
            x_final: best.x,
            f_final: best.f,
            grad_norm_final: best.grad_norm,
            iterations,
            counters: self.oracle.counters(),
            wall_time: t_start.elapsed(),
            trace: self.trace.map(Trace::TrustRegion),
        }
    }

    fn push(&mut self, record: IterationRecord) {
        if let Some(trace) = &mut self.trace {
            if trace.len() < self.trace_capacity {
                trace.push(record);
            }
        }
    }
}

/// Minimizes `oracle` from `x1`.
///
/// Invalid configurations and a start point of the wrong dimension yield
/// `Status::ConfigError`; non-finite values of `f`, its derivatives or the
/// step yield `Status::SubproblemError`.
pub fn solve<O: Objective + ?Sized>(oracle: &O, x1: &DVector<f64>, cfg: &SolverConfig) -> SolveResult {
    let t_start = Instant::now();
    let mut run = Run {
        oracle: CountingOracle::new(oracle),
        trace: cfg.trace.then(Vec::new),
        trace_capacity: cfg.trace_capacity,
    };
    let start = BestPoint {
        x: x1.clone(),
        f: f64::NAN,
        grad_norm: f64::NAN,
    };
    let cfg = match validate_config(cfg.clone()) {
        Ok(cfg) if x1.len() == oracle.dim() && !x1.is_empty() => cfg,
        _ => return run.finish(Status::ConfigError, start, 0, t_start),
    };

    let f1 = run.oracle.eval_f(x1);
    let g1 = run.oracle.eval_grad(x1);
    let g1_norm = g1.norm();
    let best = BestPoint {
        x: x1.clone(),
        f: f1,
        grad_norm: g1_norm,
    };
    if !f1.is_finite() || !g1_norm.is_finite() {
        return run.finish(Status::SubproblemError, best, 0, t_start);
    }
    if g1_norm <= cfg.eps_tol {
        return run.finish(Status::Optimal, best, 0, t_start);
    }

    let h1 = run.oracle.eval_hess(x1);
    if !h1.iter().all(|v| v.is_finite()) {
        return run.finish(Status::SubproblemError, best, 0, t_start);
    }
    let mut state = IterateState {
        x: x1.clone(),
        f_x: f1,
        g_x: g1.clone(),
        g_x_norm: g1_norm,
        radius: initial_radius(&g1, &h1, &cfg),
        eps: g1_norm,
        delta_warm: 0.0,
        best,
        k: 0,
        t_start,
    };
    let mut hessian = Some(h1);
    let gammas = Gammas::from(&cfg);
    let time_limit = Duration::from_secs_f64(cfg.max_time.min(1e12));

    loop {
        if state.k >= cfg.max_iter {
            return run.finish(Status::MaxIterations, state.best, state.k, t_start);
        }
        if t_start.elapsed() > time_limit {
            return run.finish(Status::MaxTime, state.best, state.k, t_start);
        }
        state.k += 1;

        let h = match hessian.take() {
            Some(h) => h,
            None => {
                let h = run.oracle.eval_hess(&state.x);
                if !h.iter().all(|v| v.is_finite()) {
                    return run.finish(Status::SubproblemError, state.best, state.k, t_start);
                }
                h
            }
        };

        let input = SubproblemInput {
            gradient: &state.g_x,
            hessian: &h,
            radius: state.radius,
            eps: state.eps,
            delta_warm: state.delta_warm,
            gammas,
            seed: cfg.seed.wrapping_add(state.k as u64),
        };
        let sol = match solve_subproblem(&input) {
            Ok(sol) => sol,
            Err(err) => {
                run.oracle.record_factorizations(err.factorizations);
                return run.finish(Status::SubproblemError, state.best, state.k, t_start);
            }
        };
        run.oracle.record_factorizations(sol.factorizations_used);
        debug_assert!(
            certify(&state.g_x, &h, &sol.direction, sol.delta, state.radius, state.eps, gammas)
                .holds(),
            "subproblem direction failed its certificate"
        );

        let d = sol.direction;
        let d_norm = d.norm();
        if !all_finite(&d) {
            return run.finish(Status::SubproblemError, state.best, state.k, t_start);
        }
        if d_norm < cfg.step_size_limit {
            return run.finish(Status::StepSizeLimit, state.best, state.k, t_start);
        }

        let x_trial = &state.x + &d;
        let f_trial = run.oracle.eval_f(&x_trial);
        if !f_trial.is_finite() {
            return run.finish(Status::SubproblemError, state.best, state.k, t_start);
        }
        let m_val = model_value(&state.g_x, &h, &d);
        let b_k = cfg.b_k.evaluate(state.eps, d_norm, state.f_x);

        let trial_grad = if f_trial <= state.f_x + b_k {
            let g = run.oracle.eval_grad(&x_trial);
            if !all_finite(&g) {
                return run.finish(Status::SubproblemError, state.best, state.k, t_start);
            }
            Some(g)
        } else {
            None
        };
        let trial_grad_norm = trial_grad.as_ref().map(|g| g.norm());

        let rho = if cfg.use_classic_rho {
            rho_classic(state.f_x, f_trial, m_val)
        } else {
            let min_norm = trial_grad_norm.map_or(state.g_x_norm, |t| t.min(state.g_x_norm));
            rho_hat(state.f_x, f_trial, m_val, min_norm, d_norm, cfg.theta)
        };
        let accepted = step_decision(state.f_x, f_trial, rho, &cfg);
        let successful = rho >= cfg.beta;

        let eps_before = state.eps;
        let eps_after = epsilon_update(state.eps, state.f_x, f_trial, b_k, trial_grad_norm);
        if eps_after < eps_before {
            state.best = BestPoint {
                x: x_trial.clone(),
                f: f_trial,
                grad_norm: eps_after,
            };
        }
        state.eps = eps_after;

        let radius_next = radius_update(state.radius, d_norm, rho, &cfg);
        run.push(IterationRecord {
            k: state.k,
            f: state.f_x,
            grad_norm: state.g_x_norm,
            radius: state.radius,
            step_norm: d_norm,
            delta: sol.delta,
            hard_case: sol.hard_case,
            model_value: m_val,
            f_trial,
            b_k,
            trial_grad_norm,
            rho,
            accepted,
            successful,
            eps_before,
            eps_after,
            radius_next,
            counters: run.oracle.counters(),
        });

        state.radius = radius_next;
        state.delta_warm = sol.delta;
        if accepted {
            let g = trial_grad.expect("accepted steps always have an evaluated gradient");
            state.g_x_norm = g.norm();
            state.g_x = g;
            state.x = x_trial;
            state.f_x = f_trial;
        } else {
            hessian = Some(h);
        }

        if state.eps <= cfg.eps_tol {
            return run.finish(Status::Optimal, state.best, state.k, t_start);
        }
        if !(state.radius > 0.0 && state.radius.is_finite()) {
            return run.finish(Status::SubproblemError, state.best, state.k, t_start);
        }
    }
}
