//! Inexact trust-region subproblem solver.
//!
//! Given the gradient `g`, Hessian `H`, radius `r` and the current gradient
//! tolerance `eps`, the solver returns a direction `d` and a multiplier
//! `delta >= 0` certified by
//!
//! ```text
//! ||H d + g + delta d||   <= gamma1 * eps
//! gamma2 * delta * r      <= delta * ||d||
//! ||d||                   <= r
//! M(d)                    <= -gamma3 * delta / 2 * ||d||^2
//! ```
//!
//! The search first tries the plain Newton step. Otherwise it brackets a zero
//! of the three-valued function `phi(delta)` by geometric expansion, bisects
//! the bracket, and, when the bracket collapses onto `-lambda_min(H)` without
//! a zero (the hard case), moves along an approximate minimum eigenvector
//! obtained by inverse power iteration until the boundary is reached.
//!
//! Every attempted Cholesky factorization is counted.

use std::borrow::Cow;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::config::SolverConfig;
use crate::model::{model_gradient, model_value};

/// Iteration cap shared by every loop of the solver.
pub const MAX_LOOP_ITERATIONS: usize = 100;

/// Tolerances of the acceptance certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gammas {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl Default for Gammas {
    fn default() -> Self {
        Self {
            gamma1: 0.01,
            gamma2: 0.8,
            gamma3: 0.5,
        }
    }
}

impl From<&SolverConfig> for Gammas {
    fn from(cfg: &SolverConfig) -> Self {
        Self {
            gamma1: cfg.gamma1,
            gamma2: cfg.gamma2,
            gamma3: cfg.gamma3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SubproblemInput<'a> {
    pub gradient: &'a DVector<f64>,
    pub hessian: &'a DMatrix<f64>,
    pub radius: f64,
    pub eps: f64,
    /// Multiplier returned by the previous subproblem (0 on the first one).
    pub delta_warm: f64,
    pub gammas: Gammas,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub direction: DVector<f64>,
    pub delta: f64,
    pub hard_case: bool,
    pub factorizations_used: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TrsFailure {
    #[error("invalid subproblem input")]
    InvalidInput,
    #[error("no sign change of phi found while expanding the initial interval")]
    NoBracket,
    #[error("bisection reached its iteration cap")]
    BisectionCap,
    #[error("shifted Hessian is not positive definite at the upper multiplier")]
    NotPositiveDefinite,
    #[error("inverse power iteration reached its iteration cap")]
    EigenvectorCap,
    #[error("negative discriminant while scaling the eigenvector step")]
    NegativeDiscriminant,
    #[error("direction does not satisfy the acceptance certificate")]
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("trust-region subproblem failed: {cause} after {factorizations} factorizations")]
pub struct SubproblemError {
    pub cause: TrsFailure,
    pub factorizations: u64,
}

/// Quantities entering the four certificate inequalities for a given
/// `(d, delta)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub residual: f64,
    pub residual_budget: f64,
    pub step_norm: f64,
    pub radius: f64,
    pub model_value: f64,
    pub delta: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl Certificate {
    pub fn stationarity(&self) -> bool {
        self.residual <= self.residual_budget
    }

    pub fn boundary(&self) -> bool {
        self.gamma2 * self.delta * self.radius <= self.delta * self.step_norm
    }

    pub fn inside(&self) -> bool {
        self.step_norm <= self.radius
    }

    pub fn model_decrease(&self) -> bool {
        self.model_value <= -self.gamma3 * 0.5 * self.delta * self.step_norm * self.step_norm
    }

    pub fn holds(&self) -> bool {
        self.stationarity() && self.boundary() && self.inside() && self.model_decrease()
    }
}

/// Evaluates the certificate for `(d, delta)` from scratch.
pub fn certify(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    d: &DVector<f64>,
    delta: f64,
    radius: f64,
    eps: f64,
    gammas: Gammas,
) -> Certificate {
    Certificate {
        residual: model_gradient(g, h, d, delta).norm(),
        residual_budget: gammas.gamma1 * eps,
        step_norm: d.norm(),
        radius,
        model_value: model_value(g, h, d),
        delta,
        gamma2: gammas.gamma2,
        gamma3: gammas.gamma3,
    }
}

/// Value of `phi` at one multiplier together with `d(delta) = -(H + delta I)^{-1} g`
/// whenever the shifted matrix factorized.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiEval {
    pub sign: i8,
    pub step: Option<DVector<f64>>,
}

/// Result of the initial bracketing phase.
#[derive(Debug, Clone, PartialEq)]
pub enum Interval {
    /// `phi(delta) = 0` was hit directly.
    Root { delta: f64, step: DVector<f64> },
    Bracket {
        lo: f64,
        hi: f64,
        hi_step: Option<DVector<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome {
    pub lo: f64,
    pub mid: f64,
    pub hi: f64,
    /// `d(mid)` when a zero was found, `d(hi)` in the hard case.
    pub step: DVector<f64>,
    pub hard_case: bool,
}

/// Working state for one subproblem: the data, the tolerances and the
/// running factorization count.
#[derive(Debug, Clone)]
pub struct Subproblem<'a> {
    gradient: Cow<'a, DVector<f64>>,
    hessian: &'a DMatrix<f64>,
    radius: f64,
    eps: f64,
    gammas: Gammas,
    factorizations: u64,
}

impl<'a> Subproblem<'a> {
    pub fn new(
        gradient: &'a DVector<f64>,
        hessian: &'a DMatrix<f64>,
        radius: f64,
        eps: f64,
        gammas: Gammas,
    ) -> Self {
        Self {
            gradient: Cow::Borrowed(gradient),
            hessian,
            radius,
            eps,
            gammas,
            factorizations: 0,
        }
    }

    pub fn from_input(input: &SubproblemInput<'a>) -> Self {
        Self::new(
            input.gradient,
            input.hessian,
            input.radius,
            input.eps,
            input.gammas,
        )
    }

    pub fn factorizations(&self) -> u64 {
        self.factorizations
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.gradient
    }

    fn replace_gradient(&mut self, g: DVector<f64>) {
        self.gradient = Cow::Owned(g);
    }

    pub fn certificate(&self, d: &DVector<f64>, delta: f64) -> Certificate {
        certify(
            &self.gradient,
            self.hessian,
            d,
            delta,
            self.radius,
            self.eps,
            self.gammas,
        )
    }

    fn factor(&mut self, delta: f64) -> Option<Cholesky<f64, Dyn>> {
        if !delta.is_finite() {
            return None;
        }
        self.factorizations += 1;
        let mut shifted = self.hessian.clone();
        if delta != 0.0 {
            for i in 0..shifted.nrows() {
                shifted[(i, i)] += delta;
            }
        }
        Cholesky::new(shifted)
    }

    /// Newton step `-H^{-1} g` when `H` is positive definite and the step fits
    /// inside the radius.
    pub fn try_newton_step(&mut self) -> Option<DVector<f64>> {
        let chol = self.factor(0.0)?;
        let d = -chol.solve(&*self.gradient);
        let norm = d.norm();
        (norm.is_finite() && norm <= self.radius).then_some(d)
    }

    /// `+1` when `H + delta I` is not positive definite or the step leaves the
    /// region, `0` when the step certifies, `-1` when it is shorter than
    /// `gamma2 * r`. A step inside the band `[gamma2 r, r]` whose residual
    /// exceeds the budget only through rounding is also reported as `-1`.
    pub fn phi(&mut self, delta: f64) -> PhiEval {
        let Some(chol) = self.factor(delta) else {
            return PhiEval {
                sign: 1,
                step: None,
            };
        };
        let step = -chol.solve(&*self.gradient);
        let norm = step.norm();
        if !norm.is_finite() {
            return PhiEval {
                sign: 1,
                step: None,
            };
        }
        if norm > self.radius {
            return PhiEval {
                sign: 1,
                step: Some(step),
            };
        }
        let budget = self.gammas.gamma1 * self.eps;
        let g = &*self.gradient;
        let on_band = self.gammas.gamma2 * self.radius <= norm;
        if on_band && model_gradient(g, self.hessian, &step, delta).norm() <= budget {
            return PhiEval {
                sign: 0,
                step: Some(step),
            };
        }
        if model_gradient(g, self.hessian, &step, 0.0).norm() <= budget {
            return PhiEval {
                sign: 0,
                step: Some(step),
            };
        }
        PhiEval {
            sign: -1,
            step: Some(step),
        }
    }

    /// Geometric search for an interval on which `phi` changes sign, starting
    /// from the warm-start multiplier (replaced by 1 when it is zero).
    pub fn find_initial_interval(&mut self, delta_warm: f64) -> Result<Interval, TrsFailure> {
        if !(delta_warm >= 0.0 && delta_warm.is_finite()) {
            return Err(TrsFailure::InvalidInput);
        }
        let first = self.phi(delta_warm);
        if first.sign == 0 {
            return Ok(Interval::Root {
                delta: delta_warm,
                step: first.step.expect("zero of phi carries a step"),
            });
        }
        let (base, base_eval) = if delta_warm == 0.0 {
            (1.0, self.phi(1.0))
        } else {
            (delta_warm, first)
        };
        let direction = f64::from(base_eval.sign);

        // x_i = y_{i-1}, so each round evaluates phi only at the new y.
        let mut x = base;
        let mut at_x = base_eval;
        for i in 1..=MAX_LOOP_ITERATIONS {
            if at_x.sign == 0 {
                return Ok(Interval::Root {
                    delta: x,
                    step: at_x.step.expect("zero of phi carries a step"),
                });
            }
            let y = base * (direction * (i * i) as f64).exp2();
            if !y.is_finite() {
                return Err(TrsFailure::NoBracket);
            }
            let at_y = self.phi(y);
            if at_y.sign == 0 {
                return Ok(Interval::Root {
                    delta: y,
                    step: at_y.step.expect("zero of phi carries a step"),
                });
            }
            if at_x.sign * at_y.sign < 0 {
                let (lo, hi, hi_step) = if x < y {
                    (x, y, at_y.step)
                } else {
                    (y, x, at_x.step)
                };
                return Ok(Interval::Bracket { lo, hi, hi_step });
            }
            x = y;
            at_x = at_y;
        }
        Err(TrsFailure::NoBracket)
    }

    /// Bisection on `phi`. Stops at a zero, or declares the hard case once the
    /// bracket is narrower than `gamma1 eps / (6 r)` while `d(hi)` has shifted
    /// residual at most `gamma1 eps / 3`.
    pub fn bisection(&mut self, interval: Interval) -> Result<BisectionOutcome, TrsFailure> {
        let (mut lo, mut hi, mut hi_step) = match interval {
            Interval::Root { delta, step } => {
                return Ok(BisectionOutcome {
                    lo: delta,
                    mid: delta,
                    hi: delta,
                    step,
                    hard_case: false,
                })
            }
            Interval::Bracket { lo, hi, hi_step } => (lo, hi, hi_step),
        };
        let width_tol = self.gammas.gamma1 * self.eps / (6.0 * self.radius);
        let residual_tol = self.gammas.gamma1 * self.eps / 3.0;

        for _ in 0..MAX_LOOP_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            let at_mid = self.phi(mid);
            match at_mid.sign {
                0 => {
                    return Ok(BisectionOutcome {
                        lo,
                        mid,
                        hi,
                        step: at_mid.step.expect("zero of phi carries a step"),
                        hard_case: false,
                    })
                }
                1 => lo = mid,
                _ => {
                    hi = mid;
                    hi_step = at_mid.step;
                }
            }
            if hi - lo <= width_tol {
                if let Some(d_hi) = &hi_step {
                    let residual = model_gradient(&self.gradient, self.hessian, d_hi, hi).norm();
                    if residual <= residual_tol {
                        return Ok(BisectionOutcome {
                            lo,
                            mid: hi,
                            hi,
                            step: d_hi.clone(),
                            hard_case: true,
                        });
                    }
                }
            }
        }
        Err(TrsFailure::BisectionCap)
    }

    /// Hard-case completion: `d = d(hi) + alpha y` with `y` an approximate
    /// minimum eigenvector of `H` from inverse iteration on `H + hi I`, and
    /// `alpha` placing `d` on the boundary. One factorization serves all
    /// iterations.
    pub fn inverse_power_iteration<R: Rng>(
        &mut self,
        delta_hi: f64,
        d_hi: &DVector<f64>,
        rng: &mut R,
    ) -> Result<DVector<f64>, TrsFailure> {
        let chol = self
            .factor(delta_hi)
            .ok_or(TrsFailure::NotPositiveDefinite)?;
        let mut y = random_unit_vector(d_hi.len(), rng);
        for _ in 0..MAX_LOOP_ITERATIONS {
            let z = chol.solve(&y);
            let z_norm = z.norm();
            if !(z_norm.is_finite() && z_norm > 0.0) {
                return Err(TrsFailure::NotPositiveDefinite);
            }
            y = z / z_norm;
            let alpha = solve_alpha(d_hi, &y, self.radius, &self.gradient, self.hessian)?;
            let mut d = d_hi + &y * alpha;
            pull_inside(&mut d, self.radius);
            if self.certificate(&d, delta_hi).holds() {
                return Ok(d);
            }
        }
        Err(TrsFailure::EigenvectorCap)
    }

    fn pipeline<R: Rng>(&mut self, delta_warm: f64, rng: &mut R) -> Result<Candidate, TrsFailure> {
        if let Some(d) = self.try_newton_step() {
            if self.certificate(&d, 0.0).holds() {
                return Ok(Candidate {
                    direction: d,
                    delta: 0.0,
                    hard_case: false,
                });
            }
        }
        let interval = self.find_initial_interval(delta_warm)?;
        let outcome = self.bisection(interval)?;
        if !outcome.hard_case {
            return Ok(Candidate {
                direction: outcome.step,
                delta: outcome.mid,
                hard_case: false,
            });
        }
        let d = self.inverse_power_iteration(outcome.hi, &outcome.step, rng)?;
        Ok(Candidate {
            direction: d,
            delta: outcome.hi,
            hard_case: true,
        })
    }
}

struct Candidate {
    direction: DVector<f64>,
    delta: f64,
    hard_case: bool,
}

/// Root `alpha` of `||d_base + alpha y|| = r` for unit `y`. Of the two roots,
/// the one with the lower model value is returned.
pub fn solve_alpha(
    d_base: &DVector<f64>,
    y_unit: &DVector<f64>,
    radius: f64,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
) -> Result<f64, TrsFailure> {
    let b = d_base.dot(y_unit);
    let c = d_base.norm_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 || !disc.is_finite() {
        return Err(TrsFailure::NegativeDiscriminant);
    }
    // alpha^2 + 2 b alpha + c = 0; stable pairing of the two roots
    let q = -(b + b.signum() * disc.sqrt());
    let (a1, a2) = if q == 0.0 { (0.0, 0.0) } else { (q, c / q) };
    let m1 = model_value(g, h, &(d_base + y_unit * a1));
    let m2 = model_value(g, h, &(d_base + y_unit * a2));
    Ok(if m2 < m1 { a2 } else { a1 })
}

/// Full solve: Newton shortcut, bracketing, bisection and hard-case
/// completion. If that fails, one retry runs on the gradient perturbed by
/// `gamma1 eps / 2` along a random unit vector. The returned pair is always
/// certified against the unperturbed gradient.
pub fn solve_subproblem(input: &SubproblemInput<'_>) -> Result<SubproblemSolution, SubproblemError> {
    let n = input.gradient.len();
    let valid = n > 0
        && input.hessian.nrows() == n
        && input.hessian.ncols() == n
        && input.radius > 0.0
        && input.radius.is_finite()
        && input.eps >= 0.0
        && input.delta_warm >= 0.0
        && input.delta_warm.is_finite();
    if !valid {
        return Err(SubproblemError {
            cause: TrsFailure::InvalidInput,
            factorizations: 0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
    let mut sub = Subproblem::from_input(input);

    let first = sub
        .pipeline(input.delta_warm, &mut rng)
        .and_then(|c| finalize(input, c));
    let failure = match first {
        Ok((direction, delta, hard_case)) => {
            return Ok(SubproblemSolution {
                direction,
                delta,
                hard_case,
                factorizations_used: sub.factorizations(),
            })
        }
        Err(cause) => cause,
    };

    let u = random_unit_vector(n, &mut rng);
    let perturbed = input.gradient + u * (0.5 * input.gammas.gamma1 * input.eps);
    sub.replace_gradient(perturbed);
    let retry = sub
        .pipeline(input.delta_warm, &mut rng)
        .and_then(|c| finalize(input, c));
    match retry {
        Ok((direction, delta, hard_case)) => Ok(SubproblemSolution {
            direction,
            delta,
            hard_case,
            factorizations_used: sub.factorizations(),
        }),
        Err(cause) => Err(SubproblemError {
            // the first failure is the informative one
            cause: if cause == TrsFailure::Uncertified { failure } else { cause },
            factorizations: sub.factorizations(),
        }),
    }
}

/// Certifies a candidate against the original gradient. A step found through
/// the unshifted-residual branch of `phi` certifies with multiplier zero.
fn finalize(
    input: &SubproblemInput<'_>,
    candidate: Candidate,
) -> Result<(DVector<f64>, f64, bool), TrsFailure> {
    let check = |delta: f64| {
        certify(
            input.gradient,
            input.hessian,
            &candidate.direction,
            delta,
            input.radius,
            input.eps,
            input.gammas,
        )
        .holds()
    };
    if check(candidate.delta) {
        Ok((candidate.direction, candidate.delta, candidate.hard_case))
    } else if candidate.delta != 0.0 && check(0.0) {
        Ok((candidate.direction, 0.0, candidate.hard_case))
    } else {
        Err(TrsFailure::Uncertified)
    }
}

fn pull_inside(d: &mut DVector<f64>, radius: f64) {
    for _ in 0..4 {
        let norm = d.norm();
        if norm <= radius {
            return;
        }
        *d *= radius / norm;
    }
}

/// Standard-normal sample scaled to unit length.
pub fn random_unit_vector<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}
