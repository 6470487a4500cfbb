mod common;

use cat_core::armijo::{gd_solve, ArmijoConfig};
use cat_core::cat::{solve, IterationRecord};
use cat_core::problems::{finite_diff_check, make_problem, CATALOG};
use cat_core::{gamma1_admissible, validate_config, SolverConfig, Status};
use nalgebra::DVector;
use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn traced(cfg: SolverConfig) -> SolverConfig {
    SolverConfig { trace: true, ..cfg }
}

fn check_trace(name: &str, trace: &[IterationRecord], cfg: &SolverConfig) {
    let mut prev_grads = 1u64;
    for (i, rec) in trace.iter().enumerate() {
        if let Some(next) = trace.get(i + 1) {
            assert!(next.f <= rec.f, "{name} k={}: f increased", rec.k);
            assert!(next.eps_before == rec.eps_after);
            assert!(next.radius == rec.radius_next);
        }
        assert!(rec.eps_after <= rec.eps_before, "{name} k={}", rec.k);

        if rec.rho < cfg.beta {
            assert_eq!(rec.radius_next, rec.radius / cfg.omega1, "{name} k={}", rec.k);
        } else {
            assert!(rec.radius_next >= rec.radius, "{name} k={}", rec.k);
        }

        let qualifies = rec.f_trial <= rec.f + rec.b_k;
        let grads = rec.counters.n_grad - prev_grads;
        assert_eq!(grads, u64::from(qualifies), "{name} k={}", rec.k);
        assert_eq!(rec.trial_grad_norm.is_some(), qualifies);
        prev_grads = rec.counters.n_grad;

        if let (true, Some(gt)) = (rec.rho >= cfg.beta, rec.trial_grad_norm) {
            let bound = 0.5 * cfg.beta * cfg.theta * rec.grad_norm.min(gt) * rec.step_norm;
            assert!(rec.f - rec.f_trial >= bound, "{name} k={}", rec.k);
        }
    }
}

#[test]
fn trace_invariants_on_nonconvex_problems() {
    let cfg = traced(SolverConfig::default());
    for (name, dim) in [("rosenbrock", 2), ("rosenbrock", 20), ("powell_singular", 8)] {
        let (f, spec) = make_problem(name, dim).unwrap();
        let res = solve(&f, &spec.x1, &cfg);
        assert_eq!(res.status, Status::Optimal, "{name}");
        assert!(res.grad_norm_final <= 1e-5);
        check_trace(name, res.trust_region_trace().unwrap(), &cfg);
    }
}

#[test]
fn rosenbrock_two_dimensional_reference_run() {
    let (f, spec) = make_problem("rosenbrock", 2).unwrap();
    let res = solve(&f, &spec.x1, &SolverConfig::default());
    assert_eq!(res.status, Status::Optimal);
    assert!((res.x_final[0] - 1.0).abs() < 1e-4);
    assert!((res.x_final[1] - 1.0).abs() < 1e-4);
    assert_eq!(res.iterations, ROSENBROCK_2_ITERATIONS);
    assert_eq!(res.counters.n_hess as usize, ROSENBROCK_2_HESSIANS);
}

// pinned from the first validated run
const ROSENBROCK_2_ITERATIONS: usize = 34;
const ROSENBROCK_2_HESSIANS: usize = 23;

#[test]
fn repeated_runs_are_identical() {
    let (f, spec) = make_problem("hard_case_synthetic", 5).unwrap();
    let cfg = traced(SolverConfig::default());
    let mut a = solve(&f, &spec.x1, &cfg);
    let mut b = solve(&f, &spec.x1, &cfg);
    a.wall_time = Default::default();
    b.wall_time = Default::default();
    assert_eq!(a, b);
}

#[test]
fn stationary_start_takes_no_iterations() {
    let (f, _) = make_problem("sphere", 3).unwrap();
    let res = solve(&f, &DVector::zeros(3), &SolverConfig::default());
    assert_eq!(res.status, Status::Optimal);
    assert_eq!(res.iterations, 0);
    assert_eq!(res.counters.n_hess, 0);

    let gd = gd_solve(&f, &DVector::zeros(3), &ArmijoConfig::default());
    assert_eq!(gd.status, Status::Optimal);
    assert_eq!(gd.iterations, 0);
}

#[test]
fn hard_case_problem_reaches_its_minimum() {
    for dim in [2, 3, 10] {
        let (f, spec) = make_problem("hard_case_synthetic", dim).unwrap();
        let res = solve(&f, &spec.x1, &traced(SolverConfig::default()));
        assert_eq!(res.status, Status::Optimal);
        assert!(res.trust_region_trace().unwrap()[0].hard_case);
        let opt = spec.known_opt.unwrap();
        assert!((res.f_final - opt.f).abs() < 1e-9, "{} vs {}", res.f_final, opt.f);
    }
}

#[test]
fn unbounded_problem_does_not_report_optimal() {
    let (f, spec) = make_problem("indefinite_quadratic", 4).unwrap();
    let cfg = SolverConfig {
        max_iter: 200,
        ..SolverConfig::default()
    };
    let res = solve(&f, &spec.x1, &cfg);
    assert_ne!(res.status, Status::Optimal);
}

#[test]
fn gradient_descent_needs_more_gradients_on_rosenbrock() {
    let (f, spec) = make_problem("rosenbrock", 2).unwrap();
    let cat = solve(&f, &spec.x1, &SolverConfig::default());
    let gd = gd_solve(&f, &spec.x1, &ArmijoConfig::default());
    assert_eq!(cat.status, Status::Optimal);
    assert_eq!(gd.status, Status::Optimal);
    assert!(gd.counters.n_grad > cat.counters.n_grad);
}

fn exact_bound_holds(gamma1: f64, beta: f64, theta: f64, gamma3: f64) -> bool {
    let q = |x: f64| BigRational::from_float(x).unwrap();
    let one = BigRational::from_integer(1.into());
    let two = BigRational::from_integer(2.into());
    let bound = (&one - q(beta) * q(theta) / (q(gamma3) * (&one - q(beta)))) / two;
    q(gamma1) < bound
}

#[test]
fn gamma1_check_agrees_with_rational_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut near = 0;
    for _ in 0..4000 {
        let beta: f64 = rng.random_range(0.01..0.99);
        let theta: f64 = rng.random_range(0.01..0.99);
        let gamma3: f64 = rng.random_range(0.05..=1.0);
        let approx = 0.5 * (1.0 - beta * theta / (gamma3 * (1.0 - beta)));
        if approx <= 0.0 {
            continue;
        }
        // probe the doubles adjacent to the rounded bound
        let bits = approx.to_bits() as i64 + rng.random_range(-3i64..=3);
        let gamma1 = f64::from_bits(bits as u64);
        let expected = exact_bound_holds(gamma1, beta, theta, gamma3);
        assert_eq!(gamma1_admissible(gamma1, beta, theta, gamma3), expected);
        let cfg = SolverConfig {
            beta,
            theta,
            gamma3,
            gamma1,
            gamma2: 1.0,
            ..SolverConfig::default()
        };
        assert_eq!(validate_config(cfg).is_ok(), expected);
        near += 1;
    }
    assert!(near > 1000);
}

#[test]
fn validation_is_idempotent() {
    let cfg = validate_config(SolverConfig::default()).unwrap();
    assert_eq!(validate_config(cfg.clone()), Ok(cfg));
}

#[test]
fn builtin_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for name in CATALOG {
        let dim = if name == "powell_singular" { 8 } else { 6 };
        let (f, spec) = make_problem(name, dim).unwrap();
        for _ in 0..5 {
            let x = DVector::from_fn(dim, |i, _| spec.x1[i] + rng.random_range(-1.0..1.0));
            let report = finite_diff_check(&f, &x, 1e-5);
            assert!(report.max_rel_err_grad <= 1e-4, "{name}: {report:?}");
            assert!(report.max_rel_err_hess <= 1e-3, "{name}: {report:?}");
        }
    }
}
