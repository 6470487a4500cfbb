//! Adaptive trust-region minimization of twice-differentiable functions.
//!
//! The solver ([`cat::solve`]) uses a reduction ratio whose predicted
//! reduction is augmented by a gradient-norm term, accepts every step that
//! does not increase the objective, never shrinks the radius on successful
//! steps, and terminates on the smallest gradient norm observed at trial
//! points within a small function-increase tolerance. Subproblems are solved
//! inexactly ([`trs::solve_subproblem`]) with Cholesky factorizations,
//! bisection on the multiplier, and inverse power iteration in the hard case.
//!
//! ```
//! use cat_core::{cat::solve, problems::make_problem, SolverConfig, Status};
//!
//! let (f, spec) = make_problem("rosenbrock", 2).unwrap();
//! let result = solve(&f, &spec.x1, &SolverConfig::default());
//! assert_eq!(result.status, Status::Optimal);
//! assert!((result.x_final[0] - 1.0).abs() < 1e-4);
//! ```

pub mod armijo;
pub mod cat;
pub mod config;
pub mod model;
pub mod oracle;
pub mod problems;
pub mod trs;

pub use armijo::{gd_solve, ArmijoConfig};
pub use cat::{solve, SolveResult};
pub use config::{gamma1_admissible, validate_config, ConfigError, SolverConfig, Status};
pub use oracle::{wrap_counting, Counters, CountingOracle, Objective};
