//! Reference computations used only by tests: an eigendecomposition-based
//! trust-region solver, exact rational evaluation of the subproblem
//! certificate, and a random instance generator.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num::{BigRational, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Global minimizer of `g^T d + d^T H d / 2` over `||d|| <= r`.
#[derive(Debug, Clone)]
pub struct ExactTrs {
    pub d: DVector<f64>,
    pub multiplier: f64,
    pub model: f64,
    pub hard_case: bool,
}

pub fn exact_trs(g: &DVector<f64>, h: &DMatrix<f64>, r: f64) -> ExactTrs {
    let eig = SymmetricEigen::new(h.clone());
    let lam = &eig.eigenvalues;
    let q = &eig.eigenvectors;
    let gh = q.transpose() * g;
    let n = g.len();
    let lmin = lam.min();
    let imin = lam.imin();

    let z_at = |mu: f64| DVector::from_fn(n, |i, _| -gh[i] / (lam[i] + mu));
    let model_eig = |z: &DVector<f64>| -> f64 {
        (0..n).map(|i| 0.5 * lam[i] * z[i] * z[i] + gh[i] * z[i]).sum()
    };

    if lmin > 0.0 {
        let z = z_at(0.0);
        if z.norm() <= r {
            return ExactTrs {
                d: q * &z,
                multiplier: 0.0,
                model: model_eig(&z),
                hard_case: false,
            };
        }
    }

    // ||z(mu)|| decreases on (-lmin, inf); ||z(hi)|| <= ||g|| / (hi + lmin) < r
    let mut lo = (-lmin).max(0.0);
    let mut hi = lo + g.norm() / r + 1.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if z_at(mid).norm() > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = z_at(hi);
    let mut hard_case = false;
    let zn = z.norm();
    if zn < r * (1.0 - 1e-9) {
        // eigenvector completion: the secular equation has no root
        hard_case = true;
        z[imin] = 0.0;
        let rest = z.norm_squared();
        let tau = (r * r - rest).max(0.0).sqrt();
        let mut best = z.clone();
        let mut best_m = f64::INFINITY;
        for s in [tau, -tau] {
            let mut cand = z.clone();
            cand[imin] = s;
            let m = model_eig(&cand);
            if m < best_m {
                best_m = m;
                best = cand;
            }
        }
        z = best;
    }
    ExactTrs {
        d: q * &z,
        multiplier: hi,
        model: model_eig(&z),
        hard_case,
    }
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Certificate inequalities for `(d, delta)` decided in exact rational
/// arithmetic on the given doubles. Each inequality is granted a slack of
/// `ulps` unit roundoffs times the magnitude of the terms it sums.
#[derive(Debug, Clone, Copy)]
pub struct ExactVerdict {
    pub stationarity: bool,
    pub boundary: bool,
    pub inside: bool,
    pub model_decrease: bool,
}

impl ExactVerdict {
    pub fn holds(&self) -> bool {
        self.stationarity && self.boundary && self.inside && self.model_decrease
    }
}

#[allow(clippy::too_many_arguments)]
pub fn exact_certificate(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    d: &DVector<f64>,
    delta: f64,
    r: f64,
    eps: f64,
    (gamma1, gamma2, gamma3): (f64, f64, f64),
    ulps: f64,
) -> ExactVerdict {
    let n = g.len();
    let u = ulps * UNIT_ROUNDOFF;
    let dq: Vec<BigRational> = d.iter().map(|v| rat(*v)).collect();
    let gq: Vec<BigRational> = g.iter().map(|v| rat(*v)).collect();
    let deltaq = rat(delta);

    let mut hd = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..n {
            hd[i] += rat(h[(i, j)]) * &dq[j];
        }
    }

    // stationarity: ||Hd + g + delta d|| <= gamma1 eps
    let mut res2 = BigRational::zero();
    for i in 0..n {
        let ri = &hd[i] + &gq[i] + &deltaq * &dq[i];
        res2 += &ri * &ri;
    }
    let abs_hd = h.abs() * d.abs();
    let scale_a = (abs_hd.clone() + g.abs() + d.abs() * delta).norm();
    let budget = rat(gamma1 * eps + u * scale_a);
    let stationarity = res2 <= &budget * &budget;

    let mut dn2 = BigRational::zero();
    for di in &dq {
        dn2 += di * di;
    }

    // boundary: delta > 0 implies gamma2 r <= ||d||
    let boundary = if delta == 0.0 {
        true
    } else {
        let need = rat(gamma2) * rat(r) - rat(u * r);
        !need.is_positive() || &need * &need <= dn2
    };

    // inside: ||d|| <= r
    let rmax = rat(r) * (BigRational::from_integer(1.into()) + rat(u));
    let inside = dn2 <= &rmax * &rmax;

    // model decrease: g^T d + d^T H d / 2 <= -gamma3 delta ||d||^2 / 2
    let half = BigRational::new(1.into(), 2.into());
    let mut m = BigRational::zero();
    for i in 0..n {
        m += &gq[i] * &dq[i] + &half * &dq[i] * &hd[i];
    }
    let rhs = -(&half * rat(gamma3) * &deltaq * &dn2);
    let scale_d = 0.5 * d.abs().dot(&abs_hd)
        + g.abs().dot(&d.abs())
        + 0.5 * gamma3 * delta * d.norm_squared();
    let model_decrease = m <= rhs + rat(u * scale_d);

    ExactVerdict {
        stationarity,
        boundary,
        inside,
        model_decrease,
    }
}

/// Model value in exact arithmetic, rounded once.
pub fn exact_model(g: &DVector<f64>, h: &DMatrix<f64>, d: &DVector<f64>) -> BigRational {
    let n = g.len();
    let half = BigRational::new(1.into(), 2.into());
    let mut m = BigRational::zero();
    for i in 0..n {
        let mut hdi = BigRational::zero();
        for j in 0..n {
            hdi += rat(h[(i, j)]) * rat(d[j]);
        }
        m += rat(g[i]) * rat(d[i]) + &half * rat(d[i]) * hdi;
    }
    m
}

pub fn to_f64(q: &BigRational) -> f64 {
    use num::ToPrimitive;
    q.to_f64().expect("representable")
}

/// Random dense subproblem: `H = Q diag(lambda) Q^T` with `Q` orthogonal and
/// `lambda` uniform on `[-5, 5]`, standard-normal `g`, log-uniform radius.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
    pub radius: f64,
    pub eps: f64,
    pub delta_warm: f64,
}

pub fn random_instances(count: usize, seed: u64) -> Vec<RandomInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.random_range(2..=6);
            let gauss = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let q = gauss.qr().q();
            let lam = DVector::from_fn(n, |_, _| rng.random_range(-5.0..=5.0));
            let mut h = &q * DMatrix::from_diagonal(&lam) * q.transpose();
            h = (&h + h.transpose()) * 0.5;
            let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let radius = 10f64.powf(rng.random_range(-1.0..1.0));
            let eps = if k % 2 == 0 { 1e-2 } else { 1.0 };
            let delta_warm = if rng.random_bool(0.5) {
                0.0
            } else {
                10f64.powf(rng.random_range(-2.0..2.0))
            };
            RandomInstance {
                g,
                h,
                radius,
                eps,
                delta_warm,
            }
        })
        .collect()
}
