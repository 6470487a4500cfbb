//! Gradient descent with Armijo backtracking.
//!
//! The step base is carried over between iterations: at iteration `k` the
//! trial steps are `eta_{k-1} mu^i` for `i = 0, 1, ...` and the first one
//! satisfying `f(x - t g) <= f(x) - c t ||g||^2` is taken. The base never grows.

use std::time::{Duration, Instant};

use nalgebra::DVector;
use thiserror::Error;

use crate::cat::{BestPoint, SolveResult, Trace};
use crate::config::{ConfigError, Status};
use crate::oracle::{Counters, CountingOracle, Objective};

pub const MAX_BACKTRACKS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoConfig {
    pub eta0: f64,
    /// Sufficient-decrease constant.
    pub c: f64,
    /// Backtracking factor.
    pub mu: f64,
    pub eps_tol: f64,
    pub max_iter: usize,
    pub max_time: f64,
    pub trace: bool,
    pub trace_capacity: usize,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self {
            eta0: 1.0,
            c: 1e-4,
            mu: 0.5,
            eps_tol: 1e-5,
            max_iter: 100_000,
            max_time: 18_000.0,
            trace: false,
            trace_capacity: 200_000,
        }
    }
}

impl ArmijoConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |parameter, value, requirement| ConfigError {
            parameter,
            value,
            requirement,
        };
        if !(self.eta0 > 0.0 && self.eta0.is_finite()) {
            return Err(fail("eta0", self.eta0, "eta0 in (0, inf)"));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(fail("c", self.c, "c in (0, 1)"));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(fail("mu", self.mu, "mu in (0, 1)"));
        }
        if !(self.eps_tol >= 0.0) {
            return Err(fail("eps_tol", self.eps_tol, "eps_tol >= 0"));
        }
        if self.max_iter == 0 {
            return Err(fail("max_iter", 0.0, "max_iter >= 1"));
        }
        if !(self.max_time > 0.0) {
            return Err(fail("max_time", self.max_time, "max_time > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub eta: f64,
    pub backtracks: usize,
    pub f_next: f64,
    pub counters: Counters,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("no sufficient decrease within {MAX_BACKTRACKS} backtracks from step {eta_prev}")]
pub struct BacktrackFailure {
    pub eta_prev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoStep {
    pub eta: f64,
    pub backtracks: usize,
    pub x_next: DVector<f64>,
    pub f_next: f64,
}

/// Finds the smallest `i >= 0` with
/// `f(x - eta_prev mu^i g) <= f_x - c eta_prev mu^i ||g||^2`.
/// Non-finite trial values fail the test.
pub fn armijo_step<O: Objective + ?Sized>(
    oracle: &mut CountingOracle<&O>,
    x: &DVector<f64>,
    f_x: f64,
    g: &DVector<f64>,
    eta_prev: f64,
    c: f64,
    mu: f64,
) -> Result<ArmijoStep, BacktrackFailure> {
    let g_sq = g.norm_squared();
    let mut eta = eta_prev;
    for i in 0..=MAX_BACKTRACKS {
        let x_next = x - g * eta;
        let f_next = oracle.eval_f(&x_next);
        if f_next <= f_x - c * eta * g_sq {
            return Ok(ArmijoStep {
                eta,
                backtracks: i,
                x_next,
                f_next,
            });
        }
        eta *= mu;
    }
    Err(BacktrackFailure { eta_prev })
}

/// Gradient descent from `x1` until `||grad f|| <= eps_tol` or a limit is hit.
pub fn gd_solve<O: Objective + ?Sized>(oracle: &O, x1: &DVector<f64>, acfg: &ArmijoConfig) -> SolveResult {
    let t_start = Instant::now();
    let mut counting = CountingOracle::new(oracle);
    let mut trace = acfg.trace.then(Vec::new);
    let finish = |status, best: BestPoint, iterations, counters, trace: Option<Vec<ArmijoRecord>>| {
        SolveResult {
            status,
            x_final: best.x,
            f_final: best.f,
            grad_norm_final: best.grad_norm,
            iterations,
            counters,
            wall_time: t_start.elapsed(),
            trace: trace.map(Trace::GradientDescent),
        }
    };
    if acfg.validate().is_err() || x1.len() != oracle.dim() || x1.is_empty() {
        let best = BestPoint {
            x: x1.clone(),
            f: f64::NAN,
            grad_norm: f64::NAN,
        };
        return finish(Status::ConfigError, best, 0, counting.counters(), trace);
    }
    let time_limit = Duration::from_secs_f64(acfg.max_time.min(1e12));

    let mut x = x1.clone();
    let mut f = counting.eval_f(&x);
    let mut g = counting.eval_grad(&x);
    let mut g_norm = g.norm();
    let mut best = BestPoint {
        x: x.clone(),
        f,
        grad_norm: g_norm,
    };
    let mut eta = acfg.eta0;
    let mut k = 0;
    loop {
        if !(f.is_finite() && g_norm.is_finite()) {
            return finish(Status::SubproblemError, best, k, counting.counters(), trace);
        }
        if g_norm < best.grad_norm {
            best = BestPoint {
                x: x.clone(),
                f,
                grad_norm: g_norm,
            };
        }
        if g_norm <= acfg.eps_tol {
            return finish(Status::Optimal, best, k, counting.counters(), trace);
        }
        if k >= acfg.max_iter {
            return finish(Status::MaxIterations, best, k, counting.counters(), trace);
        }
        if t_start.elapsed() > time_limit {
            return finish(Status::MaxTime, best, k, counting.counters(), trace);
        }
        k += 1;
        let step = match armijo_step(&mut counting, &x, f, &g, eta, acfg.c, acfg.mu) {
            Ok(step) => step,
            Err(_) => return finish(Status::SubproblemError, best, k, counting.counters(), trace),
        };
        eta = step.eta;
        x = step.x_next;
        let f_prev = f;
        f = step.f_next;
        g = counting.eval_grad(&x);
        if let Some(t) = &mut trace {
            if t.len() < acfg.trace_capacity {
                t.push(ArmijoRecord {
                    k,
                    f: f_prev,
                    grad_norm: g_norm,
                    eta,
                    backtracks: step.backtracks,
                    f_next: f,
                    counters: counting.counters(),
                });
            }
        }
        g_norm = g.norm();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    struct HalfSquare;

    impl Objective for HalfSquare {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &DVector<f64>) -> f64 {
            0.5 * x[0] * x[0]
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            x.clone()
        }
        fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::identity(1, 1)
        }
    }

    /// Smallest i in 0..=10 satisfying the sufficient-decrease test on f = x^2/2 at x = 1.
    fn brute_force_index(eta_prev: f64, c: f64, mu: f64) -> Option<usize> {
        (0..=10).find(|&i| {
            let t = eta_prev * mu.powi(i as i32);
            0.5 * (1.0 - t) * (1.0 - t) <= 0.5 - c * t
        })
    }

    #[test]
    fn unit_step_is_accepted_with_equality() {
        let mut oracle = CountingOracle::new(&HalfSquare);
        let x = DVector::from_element(1, 1.0);
        let g = x.clone();
        let step = armijo_step(&mut oracle, &x, 0.5, &g, 1.0, 0.5, 0.5).unwrap();
        assert_eq!(brute_force_index(1.0, 0.5, 0.5), Some(0));
        assert_eq!((step.backtracks, step.eta, step.f_next), (0, 1.0, 0.0));
        assert_eq!(step.x_next[0], 0.0);
        assert_eq!(oracle.counters().n_f, 1);
    }

    #[test]
    fn backtracks_to_first_admissible_index() {
        // t must lie in [0, 1]; 4, 2 fail and 1 succeeds
        assert_eq!(brute_force_index(4.0, 0.5, 0.5), Some(2));
        let mut oracle = CountingOracle::new(&HalfSquare);
        let x = DVector::from_element(1, 1.0);
        let g = x.clone();
        let step = armijo_step(&mut oracle, &x, 0.5, &g, 4.0, 0.5, 0.5).unwrap();
        assert_eq!(step.backtracks, 2);
        assert_eq!(step.eta, 1.0);
        assert_eq!(step.f_next, 0.0);
        assert_eq!(oracle.counters().n_f, 3);
    }

    #[test]
    fn tiny_gradient_takes_first_step() {
        let mut oracle = CountingOracle::new(&HalfSquare);
        let x = DVector::from_element(1, 1e-6);
        let g = x.clone();
        let step = armijo_step(&mut oracle, &x, 0.5e-12, &g, 1.0, 1e-4, 0.5).unwrap();
        assert_eq!(step.backtracks, 0);
    }

    #[test]
    fn optimal_start_takes_no_iterations() {
        let res = gd_solve(&HalfSquare, &DVector::zeros(1), &ArmijoConfig::default());
        assert_eq!(res.status, Status::Optimal);
        assert_eq!(res.iterations, 0);
        assert_eq!(res.counters.n_grad, 1);
    }

    #[test]
    fn invalid_config() {
        let acfg = ArmijoConfig {
            mu: 1.0,
            ..ArmijoConfig::default()
        };
        assert_eq!(acfg.validate().unwrap_err().parameter, "mu");
        let res = gd_solve(&HalfSquare, &DVector::zeros(1), &acfg);
        assert_eq!(res.status, Status::ConfigError);
    }
}
