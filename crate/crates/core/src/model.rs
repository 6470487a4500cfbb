//! Second-order Taylor model and the actual-to-predicted reduction ratios.

use nalgebra::{DMatrix, DVector};

/// `M(d) = d^T H d / 2 + g^T d`.
pub fn model_value(g: &DVector<f64>, h: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    0.5 * d.dot(&(h * d)) + g.dot(d)
}

/// `grad M(d) + delta * d = H d + g + delta * d`.
pub fn model_gradient(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    d: &DVector<f64>,
    delta: f64,
) -> DVector<f64> {
    let mut out = h * d + g;
    if delta != 0.0 {
        out.axpy(delta, d, 1.0);
    }
    out
}

fn guarded_ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        if numerator > 0.0 {
            f64::INFINITY
        } else if numerator < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    } else {
        numerator / denominator
    }
}

/// Classic ratio `(f0 - f_trial) / -M(d)`. A zero denominator yields a
/// sign-correct infinity, or zero when the numerator also vanishes.
pub fn rho_classic(f0: f64, f_trial: f64, m_val: f64) -> f64 {
    guarded_ratio(f0 - f_trial, -m_val)
}

/// Ratio whose predicted reduction is augmented by
/// `theta/2 * min_grad_norm * d_norm`, where `min_grad_norm` is the smaller of
/// the gradient norms at the current and trial points.
pub fn rho_hat(
    f0: f64,
    f_trial: f64,
    m_val: f64,
    min_grad_norm: f64,
    d_norm: f64,
    theta: f64,
) -> f64 {
    guarded_ratio(
        f0 - f_trial,
        -m_val + 0.5 * theta * min_grad_norm * d_norm,
    )
}
