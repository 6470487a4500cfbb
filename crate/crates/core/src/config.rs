//! Solver parameters, their admissible ranges, and the terminal status of a run.

use std::fmt;

use thiserror::Error;

/// Coefficients of the function-increase tolerance
/// `b_k = xi * eps_k * ||d_k|| + abs_floor * (|f(x_k)| + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkCoefficients {
    pub xi: f64,
    pub abs_floor: f64,
}

impl Default for BkCoefficients {
    fn default() -> Self {
        Self {
            xi: 0.1,
            abs_floor: 1e-8,
        }
    }
}

impl BkCoefficients {
    pub fn evaluate(&self, eps: f64, step_norm: f64, f_k: f64) -> f64 {
        self.xi * eps * step_norm + self.abs_floor * (f_k.abs() + 1.0)
    }
}

/// Problem-independent parameters of the adaptive trust-region method plus
/// run limits and ablation switches.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub theta: f64,
    pub beta: f64,
    /// Acceptance threshold on the ratio; zero accepts every decrease.
    pub sigma: f64,
    /// Radius shrink factor on unsuccessful steps.
    pub omega1: f64,
    /// Radius growth factor on successful steps.
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    /// Gradient-norm tolerance for `Optimal`.
    pub eps_tol: f64,
    pub r1_override: Option<f64>,
    pub max_iter: usize,
    /// Wall-clock limit in seconds.
    pub max_time: f64,
    pub step_size_limit: f64,
    pub b_k: BkCoefficients,
    /// Use the classic actual/predicted ratio instead of the gradient-augmented one.
    pub use_classic_rho: bool,
    /// Radius rule `omega1 * ||d||` / `||d|| / omega1` of the earlier method.
    pub conference_radius_rule: bool,
    /// Start from `r1 = 1` instead of the scaling heuristic.
    pub fixed_initial_radius: bool,
    /// Seed for the random vectors drawn by the subproblem solver.
    pub seed: u64,
    /// Record per-iteration diagnostics.
    pub trace: bool,
    /// Upper bound on the number of recorded iterations.
    pub trace_capacity: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta: 0.1,
            beta: 0.1,
            sigma: 0.0,
            omega1: 8.0,
            omega2: 16.0,
            gamma1: 0.01,
            gamma2: 0.8,
            gamma3: 0.5,
            eps_tol: 1e-5,
            r1_override: None,
            max_iter: 100_000,
            max_time: 18_000.0,
            step_size_limit: 2e-16,
            b_k: BkCoefficients::default(),
            use_classic_rho: false,
            conference_radius_rule: false,
            fixed_initial_radius: false,
            seed: 1,
            trace: false,
            trace_capacity: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration: {parameter} = {value} violates {requirement}")]
pub struct ConfigError {
    pub parameter: &'static str,
    pub value: f64,
    pub requirement: &'static str,
}

impl ConfigError {
    fn new(parameter: &'static str, value: f64, requirement: &'static str) -> Self {
        Self {
            parameter,
            value,
            requirement,
        }
    }
}

/// Strict upper bound on `gamma1`: `(1 - beta*theta / (gamma3*(1 - beta))) / 2`.
pub fn gamma1_upper_bound(beta: f64, theta: f64, gamma3: f64) -> f64 {
    0.5 * (1.0 - beta * theta / (gamma3 * (1.0 - beta)))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    (s, (a - av) + (b - bv))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Adds `b` to a nonoverlapping expansion, keeping it nonoverlapping
/// (Shewchuk's grow-expansion).
fn grow_expansion(e: &[f64], b: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(e.len() + 1);
    let mut q = b;
    for &ei in e {
        let (s, err) = two_sum(q, ei);
        out.push(err);
        q = s;
    }
    out.push(q);
    out
}

fn scale_expansion(e: &[f64], b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for &ei in e {
        let (p, err) = two_prod(ei, b);
        out = grow_expansion(&out, err);
        out = grow_expansion(&out, p);
    }
    out
}

/// Exact test of `gamma1 < (1 - beta*theta / (gamma3*(1 - beta))) / 2`,
/// evaluated as `(1 - 2 gamma1) gamma3 (1 - beta) > beta theta` on
/// error-free expansions. Assumes `beta < 1`, `gamma3 > 0` and no underflow.
pub fn gamma1_admissible(gamma1: f64, beta: f64, theta: f64, gamma3: f64) -> bool {
    let (a, a_err) = two_sum(1.0, -beta);
    let (b, b_err) = two_sum(1.0, -2.0 * gamma1);
    let mut lhs = Vec::new();
    for (x, y) in [(a, b), (a, b_err), (a_err, b), (a_err, b_err)] {
        let (p, err) = two_prod(x, y);
        lhs = grow_expansion(&lhs, err);
        lhs = grow_expansion(&lhs, p);
    }
    let lhs = scale_expansion(&lhs, gamma3);
    let (r, r_err) = two_prod(beta, theta);
    let diff = grow_expansion(&grow_expansion(&lhs, -r_err), -r);
    // the most significant nonzero component carries the sign
    diff.iter().rev().find(|v| **v != 0.0).is_some_and(|v| *v > 0.0)
}

/// Returns `cfg` unchanged when every parameter requirement holds, otherwise
/// the first violated one. Comparisons are written so that NaN always fails.
pub fn validate_config(cfg: SolverConfig) -> Result<SolverConfig, ConfigError> {
    let c = &cfg;
    if !(c.theta > 0.0 && c.theta < 1.0) {
        return Err(ConfigError::new("theta", c.theta, "theta in (0, 1)"));
    }
    if !(c.beta > 0.0 && c.beta < 1.0) {
        return Err(ConfigError::new("beta", c.beta, "beta in (0, 1)"));
    }
    if !(c.sigma >= 0.0 && c.sigma <= c.beta) {
        return Err(ConfigError::new("sigma", c.sigma, "sigma in [0, beta]"));
    }
    if !(c.omega1 > 1.0 && c.omega1.is_finite()) {
        return Err(ConfigError::new("omega1", c.omega1, "omega1 in (1, inf)"));
    }
    if !(c.omega2 >= c.omega1 && c.omega2.is_finite()) {
        return Err(ConfigError::new("omega2", c.omega2, "omega2 in [omega1, inf)"));
    }
    if !(c.gamma2 > 1.0 / c.omega1 && c.gamma2 <= 1.0) {
        return Err(ConfigError::new("gamma2", c.gamma2, "gamma2 in (1/omega1, 1]"));
    }
    if !(c.gamma3 > 0.0 && c.gamma3 <= 1.0) {
        return Err(ConfigError::new("gamma3", c.gamma3, "gamma3 in (0, 1]"));
    }
    if !(c.gamma1 >= 0.0 && gamma1_admissible(c.gamma1, c.beta, c.theta, c.gamma3)) {
        return Err(ConfigError::new(
            "gamma1",
            c.gamma1,
            "0 <= gamma1 < (1 - beta*theta/(gamma3*(1 - beta)))/2",
        ));
    }
    if !(c.eps_tol >= 0.0) {
        return Err(ConfigError::new("eps_tol", c.eps_tol, "eps_tol >= 0"));
    }
    if let Some(r1) = c.r1_override {
        if !(r1 > 0.0 && r1.is_finite()) {
            return Err(ConfigError::new("r1", r1, "r1 > 0 and finite"));
        }
    }
    if c.max_iter == 0 {
        return Err(ConfigError::new("max_iter", 0.0, "max_iter >= 1"));
    }
    if !(c.max_time > 0.0) {
        return Err(ConfigError::new("max_time", c.max_time, "max_time > 0"));
    }
    if !(c.step_size_limit > 0.0) {
        return Err(ConfigError::new(
            "step_size_limit",
            c.step_size_limit,
            "step_size_limit > 0",
        ));
    }
    if !(c.b_k.xi > 0.0 && c.b_k.xi.is_finite()) {
        return Err(ConfigError::new("b_k.xi", c.b_k.xi, "xi in (0, inf)"));
    }
    if !(c.b_k.abs_floor >= 0.0 && c.b_k.abs_floor.is_finite()) {
        return Err(ConfigError::new(
            "b_k.abs_floor",
            c.b_k.abs_floor,
            "abs_floor >= 0",
        ));
    }
    Ok(cfg)
}

/// Terminal status of a solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Optimal,
    MaxIterations,
    MaxTime,
    StepSizeLimit,
    /// Subproblem solver failure or non-finite arithmetic ("numerical error").
    SubproblemError,
    ConfigError,
}

impl Status {
    pub const ALL: [Status; 6] = [
        Status::Optimal,
        Status::MaxIterations,
        Status::MaxTime,
        Status::StepSizeLimit,
        Status::SubproblemError,
        Status::ConfigError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "OPTIMAL",
            Status::MaxIterations => "ITERATION_LIMIT",
            Status::MaxTime => "MAX_TIME",
            Status::StepSizeLimit => "STEP_SIZE_LIMIT",
            Status::SubproblemError => "TRUST_REGION_SUBPROBLEM_ERROR",
            Status::ConfigError => "CONFIG_ERROR",
        }
    }

    pub fn is_optimal(self) -> bool {
        self == Status::Optimal
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown status `{s}`"))
    }
}
