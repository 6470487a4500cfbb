use nalgebra::{DMatrix, DVector};

use crate::oracle::Objective;

/// Largest relative deviations between analytic and central-difference
/// derivatives; each entry is scaled by `max(1, |analytic|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub max_rel_err_grad: f64,
    pub max_rel_err_hess: f64,
}

fn rel_err(estimate: f64, exact: f64) -> f64 {
    (estimate - exact).abs() / exact.abs().max(1.0)
}

/// Central differences of `f` for the gradient and of the analytic gradient
/// for the Hessian, both with step `h`.
pub fn finite_diff_check<O: Objective + ?Sized>(oracle: &O, x: &DVector<f64>, h: f64) -> FdReport {
    assert!(h > 0.0, "finite-difference step must be positive");
    let n = oracle.dim();
    let grad = oracle.gradient(x);
    let hess: DMatrix<f64> = oracle.hessian(x);

    let mut max_rel_err_grad: f64 = 0.0;
    let mut max_rel_err_hess: f64 = 0.0;
    let mut probe = x.clone();
    for i in 0..n {
        let xi = x[i];
        probe[i] = xi + h;
        let f_plus = oracle.value(&probe);
        let g_plus = oracle.gradient(&probe);
        probe[i] = xi - h;
        let f_minus = oracle.value(&probe);
        let g_minus = oracle.gradient(&probe);
        probe[i] = xi;

        let dfi = (f_plus - f_minus) / (2.0 * h);
        max_rel_err_grad = max_rel_err_grad.max(rel_err(dfi, grad[i]));
        for j in 0..n {
            let hji = (g_plus[j] - g_minus[j]) / (2.0 * h);
            max_rel_err_hess = max_rel_err_hess.max(rel_err(hji, hess[(j, i)]));
        }
    }
    FdReport {
        max_rel_err_grad,
        max_rel_err_hess,
    }
}
