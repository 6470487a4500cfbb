//! Analytic test problems, a finite-difference derivative checker, and a
//! plain-text format for quadratic problems.

mod builtin;
mod fd;
mod quadratic;

use nalgebra::DVector;
use thiserror::Error;

use crate::oracle::Objective;

pub use builtin::{
    ConvexQuadratic, ExtendedRosenbrock, HardCaseSynthetic, IndefiniteQuadratic, PowellSingular,
    Rosenbrock, Sphere,
};
pub use fd::{finite_diff_check, FdReport};
pub use quadratic::{load_quadratic, parse_quadratic, QuadraticParseError, QuadraticProblem};

pub const DEFAULT_KAPPA: f64 = 100.0;

/// Family names accepted by [`make_problem`].
pub const CATALOG: [&str; 7] = [
    "sphere",
    "convex_quadratic",
    "rosenbrock",
    "extended_rosenbrock",
    "powell_singular",
    "indefinite_quadratic",
    "hard_case_synthetic",
];

pub type BoxedObjective = Box<dyn Objective + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptimum {
    pub x: DVector<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    pub x1: DVector<f64>,
    pub known_opt: Option<KnownOptimum>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("unknown problem `{0}`")]
    UnknownName(String),
    #[error("problem `{name}` does not accept dimension {dim}: {reason}")]
    InvalidDim {
        name: String,
        dim: usize,
        reason: &'static str,
    },
    #[error("invalid parameter for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

/// Splits `convex_quadratic(1000)` into the family and its parameter.
fn parse_family(name: &str) -> Result<(&str, Option<f64>), ProblemError> {
    let name = name.trim();
    let Some(open) = name.find('(') else {
        return Ok((name, None));
    };
    let family = &name[..open];
    let inner = name[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| ProblemError::InvalidParameter {
            name: name.to_string(),
            reason: "missing closing parenthesis".into(),
        })?;
    let value = inner
        .trim()
        .parse::<f64>()
        .map_err(|e| ProblemError::InvalidParameter {
            name: name.to_string(),
            reason: e.to_string(),
        })?;
    Ok((family, Some(value)))
}

fn alternating_start(dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |i, _| if i % 2 == 0 { -1.2 } else { 1.0 })
}

/// Builds a catalog problem with its default start point and, when known,
/// its minimizer.
pub fn make_problem(name: &str, dim: usize) -> Result<(BoxedObjective, ProblemSpec), ProblemError> {
    let (family, param) = parse_family(name)?;
    let invalid = |reason| ProblemError::InvalidDim {
        name: family.to_string(),
        dim,
        reason,
    };
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if param.is_some() && family != "convex_quadratic" {
        return Err(ProblemError::InvalidParameter {
            name: name.to_string(),
            reason: "only convex_quadratic takes a parameter".into(),
        });
    }
    let zero_opt = |f| {
        Some(KnownOptimum {
            x: DVector::zeros(dim),
            f,
        })
    };
    let ones_opt = || {
        Some(KnownOptimum {
            x: DVector::from_element(dim, 1.0),
            f: 0.0,
        })
    };

    let (oracle, x1, known_opt): (BoxedObjective, _, _) = match family {
        "sphere" => {
            let x1 = DVector::from_fn(dim, |i, _| match i {
                0 => 3.0,
                1 => 4.0,
                _ => 0.0,
            });
            (Box::new(Sphere { dim }), x1, zero_opt(0.0))
        }
        "convex_quadratic" => {
            let kappa = param.unwrap_or(DEFAULT_KAPPA);
            if !(kappa >= 1.0 && kappa.is_finite()) {
                return Err(ProblemError::InvalidParameter {
                    name: name.to_string(),
                    reason: format!("condition number {kappa} must be >= 1"),
                });
            }
            (
                Box::new(ConvexQuadratic::new(dim, kappa)),
                DVector::from_element(dim, 1.0),
                zero_opt(0.0),
            )
        }
        "rosenbrock" => {
            if dim < 2 {
                return Err(invalid("needs at least 2 variables"));
            }
            (Box::new(Rosenbrock { dim }), alternating_start(dim), ones_opt())
        }
        "extended_rosenbrock" => {
            if !dim.is_multiple_of(2) {
                return Err(invalid("dimension must be even"));
            }
            (
                Box::new(ExtendedRosenbrock { dim }),
                alternating_start(dim),
                ones_opt(),
            )
        }
        "powell_singular" => {
            if !dim.is_multiple_of(4) {
                return Err(invalid("dimension must be a multiple of 4"));
            }
            let x1 = DVector::from_fn(dim, |i, _| [3.0, -1.0, 0.0, 1.0][i % 4]);
            (Box::new(PowellSingular { dim }), x1, zero_opt(0.0))
        }
        "indefinite_quadratic" => {
            if dim < 2 {
                return Err(invalid("needs at least 2 variables"));
            }
            (
                Box::new(IndefiniteQuadratic { dim }),
                DVector::zeros(dim),
                None,
            )
        }
        "hard_case_synthetic" => {
            if dim < 2 {
                return Err(invalid("needs at least 2 variables"));
            }
            let problem = HardCaseSynthetic { dim };
            let c = problem.coupling();
            let x_opt = DVector::from_fn(dim, |i, _| if i == 0 { 1.0 } else { -c });
            // -1/4 from the first coordinate, -c^2/2 from each of the n-1 others
            let f_opt = -0.25 - 0.5 * c * c * (dim - 1) as f64;
            (
                Box::new(problem),
                DVector::zeros(dim),
                Some(KnownOptimum { x: x_opt, f: f_opt }),
            )
        }
        _ => return Err(ProblemError::UnknownName(name.to_string())),
    };
    let spec = ProblemSpec {
        name: name.trim().to_string(),
        dim,
        x1,
        known_opt,
    };
    Ok((oracle, spec))
}
