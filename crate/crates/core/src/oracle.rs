//! Objective functions and evaluation counting.

use nalgebra::{DMatrix, DVector};

/// A twice-differentiable objective `f: R^n -> R` with analytic derivatives.
///
/// Implementations must be deterministic: repeated evaluation at the same
/// point returns identical values.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).hessian(x)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).hessian(x)
    }
}

/// Evaluation counts for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub n_f: u64,
    pub n_grad: u64,
    pub n_hess: u64,
    /// Attempted Cholesky factorizations, successful or not.
    pub n_fact: u64,
}

/// Wraps an objective and counts every evaluation. Hessians are symmetrized
/// as `(H + H^T) / 2` before they are handed out.
#[derive(Debug, Clone)]
pub struct CountingOracle<O> {
    inner: O,
    counters: Counters,
}

pub fn wrap_counting<O: Objective>(oracle: O) -> CountingOracle<O> {
    CountingOracle::new(oracle)
}

impl<O: Objective> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            counters: Counters::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn eval_f(&mut self, x: &DVector<f64>) -> f64 {
        self.counters.n_f += 1;
        self.inner.value(x)
    }

    pub fn eval_grad(&mut self, x: &DVector<f64>) -> DVector<f64> {
        self.counters.n_grad += 1;
        self.inner.gradient(x)
    }

    pub fn eval_hess(&mut self, x: &DVector<f64>) -> DMatrix<f64> {
        self.counters.n_hess += 1;
        symmetrize(self.inner.hessian(x))
    }

    pub fn record_factorizations(&mut self, count: u64) {
        self.counters.n_fact += count;
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn reset(&mut self) {
        self.counters = Counters::default();
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}

pub(crate) fn symmetrize(mut h: DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = avg;
            h[(j, i)] = avg;
        }
    }
    h
}
