use nalgebra::{DMatrix, DVector};

use crate::oracle::Objective;

/// `f(x) = ||x||^2 / 2`.
#[derive(Debug, Clone)]
pub struct Sphere {
    pub dim: usize,
}

impl Objective for Sphere {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.norm_squared()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }
}

/// `f(x) = sum_i lambda_i x_i^2 / 2` with `lambda_i` log-spaced on `[1, kappa]`.
#[derive(Debug, Clone)]
pub struct ConvexQuadratic {
    pub eigenvalues: DVector<f64>,
}

impl ConvexQuadratic {
    pub fn new(dim: usize, kappa: f64) -> Self {
        let eigenvalues = DVector::from_fn(dim, |i, _| {
            if dim == 1 {
                1.0
            } else {
                kappa.powf(i as f64 / (dim - 1) as f64)
            }
        });
        Self { eigenvalues }
    }
}

impl Objective for ConvexQuadratic {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(xi, li)| li * xi * xi)
            .sum::<f64>()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.component_mul(&self.eigenvalues)
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.eigenvalues)
    }
}

/// Chained Rosenbrock `sum_{i<n} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2`.
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    pub dim: usize,
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (0..self.dim - 1)
            .map(|i| {
                let a = x[i + 1] - x[i] * x[i];
                let b = 1.0 - x[i];
                100.0 * a * a + b * b
            })
            .sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for i in 0..self.dim - 1 {
            let a = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * a;
        }
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim - 1 {
            h[(i, i)] += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
            h[(i + 1, i + 1)] += 200.0;
            h[(i, i + 1)] -= 400.0 * x[i];
            h[(i + 1, i)] -= 400.0 * x[i];
        }
        h
    }
}

/// Sum of independent two-dimensional Rosenbrock functions over the pairs
/// `(x_{2j}, x_{2j+1})`.
#[derive(Debug, Clone)]
pub struct ExtendedRosenbrock {
    pub dim: usize,
}

impl Objective for ExtendedRosenbrock {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (0..self.dim / 2)
            .map(|j| {
                let (u, w) = (x[2 * j], x[2 * j + 1]);
                100.0 * (w - u * u).powi(2) + (1.0 - u).powi(2)
            })
            .sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for j in 0..self.dim / 2 {
            let (u, w) = (x[2 * j], x[2 * j + 1]);
            let a = w - u * u;
            g[2 * j] = -400.0 * u * a - 2.0 * (1.0 - u);
            g[2 * j + 1] = 200.0 * a;
        }
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim / 2 {
            let (u, w) = (x[2 * j], x[2 * j + 1]);
            let (p, q) = (2 * j, 2 * j + 1);
            h[(p, p)] = 1200.0 * u * u - 400.0 * w + 2.0;
            h[(q, q)] = 200.0;
            h[(p, q)] = -400.0 * u;
            h[(q, p)] = -400.0 * u;
        }
        h
    }
}

/// Powell's singular function on blocks of four variables; the Hessian is
/// singular at the minimizer `x* = 0`.
#[derive(Debug, Clone)]
pub struct PowellSingular {
    pub dim: usize,
}

impl Objective for PowellSingular {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (0..self.dim / 4)
            .map(|j| {
                let (a, b, c, d) = (x[4 * j], x[4 * j + 1], x[4 * j + 2], x[4 * j + 3]);
                (a + 10.0 * b).powi(2)
                    + 5.0 * (c - d).powi(2)
                    + (b - 2.0 * c).powi(4)
                    + 10.0 * (a - d).powi(4)
            })
            .sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for j in 0..self.dim / 4 {
            let i = 4 * j;
            let (a, b, c, d) = (x[i], x[i + 1], x[i + 2], x[i + 3]);
            let t1 = a + 10.0 * b;
            let t2 = c - d;
            let t3 = b - 2.0 * c;
            let t4 = a - d;
            g[i] = 2.0 * t1 + 40.0 * t4.powi(3);
            g[i + 1] = 20.0 * t1 + 4.0 * t3.powi(3);
            g[i + 2] = 10.0 * t2 - 8.0 * t3.powi(3);
            g[i + 3] = -10.0 * t2 - 40.0 * t4.powi(3);
        }
        g
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim / 4 {
            let i = 4 * j;
            let (a, b, c, d) = (x[i], x[i + 1], x[i + 2], x[i + 3]);
            let s3 = 12.0 * (b - 2.0 * c).powi(2);
            let s4 = 120.0 * (a - d).powi(2);
            let block = [
                [2.0 + s4, 20.0, 0.0, -s4],
                [20.0, 200.0 + s3, -2.0 * s3, 0.0],
                [0.0, -2.0 * s3, 10.0 + 4.0 * s3, -10.0],
                [-s4, 0.0, -10.0, 10.0 + s4],
            ];
            for (r, row) in block.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    h[(i + r, i + c)] = *v;
                }
            }
        }
        h
    }
}

/// `f(x) = x^T D x / 2 + 1^T x` with `D = diag(1, -2, 1, -2, ...)`; unbounded below.
#[derive(Debug, Clone)]
pub struct IndefiniteQuadratic {
    pub dim: usize,
}

impl IndefiniteQuadratic {
    fn eigenvalue(i: usize) -> f64 {
        if i.is_multiple_of(2) {
            1.0
        } else {
            -2.0
        }
    }
}

impl Objective for IndefiniteQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, xi)| 0.5 * Self::eigenvalue(i) * xi * xi + xi)
            .sum()
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| Self::eigenvalue(i) * x[i] + 1.0)
    }
    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j {
                Self::eigenvalue(i)
            } else {
                0.0
            }
        })
    }
}

/// `f(x) = x_0^4/4 - x_0^2/2 + sum_{i>0} (x_i^2/2 + c x_i)` with
/// `c = 1/sqrt(n-1)`. At the origin the Hessian is `diag(-1, 1, ..., 1)` and
/// the gradient `(0, c, ..., c)` is orthogonal to the eigenvector `e_0` of the
/// smallest eigenvalue, so the first subproblem is a hard case.
#[derive(Debug, Clone)]
pub struct HardCaseSynthetic {
    pub dim: usize,
}

impl HardCaseSynthetic {
    pub fn coupling(&self) -> f64 {
        1.0 / ((self.dim - 1) as f64).sqrt()
    }
}

impl Objective for HardCaseSynthetic {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        let c = self.coupling();
        let x0 = x[0];
        let tail: f64 = x.iter().skip(1).map(|xi| 0.5 * xi * xi + c * xi).sum();
        0.25 * x0.powi(4) - 0.5 * x0 * x0 + tail
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self.coupling();
        DVector::from_fn(self.dim, |i, _| {
            if i == 0 {
                x[0].powi(3) - x[0]
            } else {
                x[i] + c
            }
        })
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::identity(self.dim, self.dim);
        h[(0, 0)] = 3.0 * x[0] * x[0] - 1.0;
        h
    }
}
